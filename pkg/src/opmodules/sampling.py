"""Seeded random modules, morphisms and admissible pairs, and the axiom checks.

Every generator takes a ``numpy.random.Generator`` and is deterministic in
it.  Modules come from three families: concrete right submodules of
``M_{p,N}``, quotients of those by generated submodules, and direct sums.
Admissible monos and epis for ``min`` are conjugated direct-sum inclusions
and projections; for ``rel`` and ``max`` non-split constructions (subobject
inclusions, quotient maps, the embedding into Hom(A, E), the projection
from E (x) A) are mixed in.
"""

from __future__ import annotations

import numpy as np

from .exact import KernelCokernelPair, classify_pair, pair_from_epi, pair_from_mono
from .haagerup import projection_matrix
from .modules import (
    ModMorphism,
    OpModule,
    canonical_embedding,
    compose,
    concrete_module,
    direct_sum_module,
    generated_submodule,
    hom_basis,
    pullback,
    pullback_mediator,
    pushout,
    pushout_mediator,
    quotient_module,
    submodule,
    zero_module,
)
from .numerics import null_space
from .opspace import HaagerupTensor

# derived constructions (Hom(A, E), E (x) A) are only used below this size
DERIVED_CAP = 16


def _cnormal(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


# -- modules -----------------------------------------------------------------------


def random_concrete_module(algebra, rng, max_dim=8):
    n_amb = algebra.ambient_dim
    for _ in range(12):
        p = int(rng.integers(1, 4))
        k = int(rng.integers(1, 4))
        r = int(rng.integers(1, min(p, n_amb) + 1))
        gens = np.einsum("kpr,krn->kpn", _cnormal(rng, k, p, r), _cnormal(rng, k, r, n_amb))
        if rng.random() < 0.5 and algebra.blocks is not None:
            # restrict to a random set of blocks for a smaller module
            keep = rng.random(len(algebra.blocks.sizes)) < 0.6
            mask = np.concatenate([np.full(m, keep[b]) for b, m in enumerate(algebra.blocks.sizes)])
            gens = gens * mask
        module = concrete_module(algebra, gens)
        if 1 <= module.dim <= max_dim:
            return module
    return concrete_module(algebra, np.eye(1, n_amb)[None])


def random_quotient_module(algebra, rng, max_dim=8):
    for _ in range(6):
        big = random_concrete_module(algebra, rng, max_dim + 3)
        sub = generated_submodule(big, _cnormal(rng, big.dim, 1))
        if 1 <= big.dim - sub.shape[1] <= max_dim:
            return quotient_module(big, sub, check=False)[0]
    return random_concrete_module(algebra, rng, max_dim)


def random_module(algebra, rng, max_dim=8, allow_zero=True):
    """Module of dimension at most ``max_dim``, occasionally zero."""
    u = rng.random()
    if allow_zero and u < 0.03:
        return zero_module(algebra)
    if u < 0.55 or max_dim < 2:
        return random_concrete_module(algebra, rng, max_dim)
    if u < 0.8:
        return random_quotient_module(algebra, rng, max_dim)
    left = random_module(algebra, rng, max_dim - 1, allow_zero=False)
    right = random_module(algebra, rng, max_dim - left.dim, allow_zero=False) if max_dim > left.dim else zero_module(algebra)
    return direct_sum_module(left, right).module


def random_morphism(src, dst, rng):
    basis = hom_basis(src, dst)
    if len(basis) == 0:
        return ModMorphism(src, dst, np.zeros((dst.dim, src.dim)))
    coeff = _cnormal(rng, len(basis))
    mat = np.tensordot(coeff, basis, axes=(0, 0))
    return ModMorphism(src, dst, mat / max(1.0, np.linalg.norm(mat, 2)))


def random_automorphism(module, rng, max_cond=20.0):
    """Well-conditioned invertible module endomorphism."""
    if module.dim == 0:
        return module.identity
    basis = hom_basis(module, module)
    for scale in (0.5, 0.25, 0.1, 0.0):
        coeff = _cnormal(rng, len(basis))
        mat = np.tensordot(coeff, basis, axes=(0, 0))
        mat = np.eye(module.dim) + scale * mat / max(1e-300, np.linalg.norm(mat, 2))
        if np.linalg.cond(mat) < max_cond:
            phase = np.exp(2j * np.pi * rng.random())
            return ModMorphism(module, module, phase * mat)
    return module.identity


def random_submodule(module, rng):
    basis = generated_submodule(module, _cnormal(rng, module.dim, 1))
    return submodule(module, basis, check=False)


# -- admissible monos and epis ---------------------------------------------------


def split_mono_from(sub, rng, max_dim=8):
    """``K -> K (+) C`` as a graph, then an automorphism of the sum."""
    other = random_module(sub.algebra, rng, max(1, max_dim - sub.dim))
    s = direct_sum_module(sub, other)
    graph = random_morphism(sub, other, rng)
    mat = s.iota_left.matrix + s.iota_right.matrix @ graph.matrix
    phi = random_automorphism(s.module, rng)
    return ModMorphism(sub, s.module, phi.matrix @ mat)


def split_epi_onto(quot, rng, max_dim=8):
    other = random_module(quot.algebra, rng, max(1, max_dim - quot.dim))
    s = direct_sum_module(quot, other)
    graph = random_morphism(other, quot, rng)
    mat = s.pi_left.matrix + graph.matrix @ s.pi_right.matrix
    phi = random_automorphism(s.module, rng)
    return ModMorphism(s.module, quot, mat @ np.linalg.inv(phi.matrix))


def mono_from(sub, structure, rng, max_dim=8):
    """Random admissible mono with domain ``sub``."""
    if structure == "min" or sub.dim == 0:
        return split_mono_from(sub, rng, max_dim)
    u = rng.random()
    if u < 0.4 and sub.dim * sub.algebra.dim <= DERIVED_CAP:
        hom, iota = canonical_embedding(sub)
        return iota
    return split_mono_from(sub, rng, max_dim)


def epi_onto(quot, structure, rng, max_dim=8):
    """Random admissible epi with codomain ``quot``."""
    if structure == "min" or quot.dim == 0:
        return split_epi_onto(quot, rng, max_dim)
    if rng.random() < 0.4 and quot.dim * quot.algebra.dim <= DERIVED_CAP:
        tensor = OpModule(
            HaagerupTensor(quot.space, quot.algebra),
            quot.algebra,
            np.array([np.kron(np.eye(quot.dim), r) for r in quot.algebra.right_mult]),
        )
        return ModMorphism(tensor, quot, projection_matrix(quot))
    return split_epi_onto(quot, rng, max_dim)


def fresh_mono(algebra, structure, rng, max_dim=8):
    """Admissible mono with random domain and codomain."""
    if structure != "min" and rng.random() < 0.6:
        module = random_module(algebra, rng, max_dim)
        if module.dim:
            sub, incl = random_submodule(module, rng)
            phi = random_automorphism(module, rng)
            return compose(phi, incl)
    sub = random_module(algebra, rng, max(1, max_dim // 2))
    return split_mono_from(sub, rng, max_dim)


def fresh_epi(algebra, structure, rng, max_dim=8):
    if structure != "min" and rng.random() < 0.6:
        module = random_module(algebra, rng, max_dim)
        if module.dim:
            quot, proj = quotient_module(module, generated_submodule(module, _cnormal(rng, module.dim, 1)), check=False)
            phi = random_automorphism(module, rng)
            return ModMorphism(module, quot, proj.matrix @ phi.matrix)
    quot = random_module(algebra, rng, max(1, max_dim // 2))
    return split_epi_onto(quot, rng, max_dim)


def random_pair(algebra, rng, max_dim=8, structure="max"):
    """Random kernel-cokernel pair, admissible for ``structure``."""
    if rng.random() < 0.5:
        return pair_from_mono(fresh_mono(algebra, structure, rng, max_dim))
    return pair_from_epi(fresh_epi(algebra, structure, rng, max_dim))


# -- axiom checks ------------------------------------------------------------------


def _verdict(pair, structure):
    """``(member, residual)`` for ``pair`` in ``structure``."""
    wanted = {"max": ("max",), "rel": ("rel",), "min": ("rel", "min")}[structure]
    m = classify_pair(pair, sample_universal=True, structures=wanted)
    residual = m.diagnostics.get("composite_residual", 0.0)
    for key in ("kernel_factor_residual", "cokernel_factor_residual"):
        residual = max(residual, m.diagnostics.get(key, 0.0))
    for cert in (m.linear_split, m.module_split):
        if cert is not None and cert.split:
            residual = max(residual, max(cert.residuals.values(), default=0.0))
    return bool(m.member(structure)), float(residual)


def _combine(*verdicts):
    return all(v[0] for v in verdicts), max((v[1] for v in verdicts), default=0.0)


def axiom_e0(algebra, structure, rng, max_dim=8):
    """Identities are admissible monos."""
    module = random_module(algebra, rng, max_dim)
    zero = zero_module(algebra)
    return _verdict(KernelCokernelPair(module.identity, ModMorphism(module, zero, np.zeros((0, module.dim)))), structure)


def axiom_e0op(algebra, structure, rng, max_dim=8):
    """Identities are admissible epis."""
    module = random_module(algebra, rng, max_dim)
    zero = zero_module(algebra)
    return _verdict(KernelCokernelPair(ModMorphism(zero, module, np.zeros((module.dim, 0))), module.identity), structure)


def axiom_e1(algebra, structure, rng, max_dim=8):
    """Composites of admissible monos are admissible monos."""
    first = fresh_mono(algebra, structure, rng, max_dim // 2 + 1)
    second = mono_from(first.dst, structure, rng, max_dim + 4)
    return _combine(
        _verdict(pair_from_mono(first), structure),
        _verdict(pair_from_mono(second), structure),
        _verdict(pair_from_mono(compose(second, first)), structure),
    )


def axiom_e1op(algebra, structure, rng, max_dim=8):
    """Composites of admissible epis are admissible epis."""
    second = fresh_epi(algebra, structure, rng, max_dim // 2 + 1)
    first = epi_onto(second.src, structure, rng, max_dim + 4)
    return _combine(
        _verdict(pair_from_epi(first), structure),
        _verdict(pair_from_epi(second), structure),
        _verdict(pair_from_epi(compose(second, first)), structure),
    )


def random_map_from(sub, rng, max_dim):
    """A module with an interesting morphism out of ``sub``."""
    u = rng.random()
    if u < 0.4:
        target = random_module(sub.algebra, rng, max_dim)
        return random_morphism(sub, target, rng)
    if u < 0.7 and sub.dim:
        quot, proj = quotient_module(sub, generated_submodule(sub, _cnormal(rng, sub.dim, 1)), check=False)
        return proj
    return split_mono_from(sub, rng, max_dim) if sub.dim else random_morphism(sub, zero_module(sub.algebra), rng)


def random_map_into(quot, rng, max_dim):
    """A module with an interesting morphism into ``quot``."""
    u = rng.random()
    if u < 0.4:
        source = random_module(quot.algebra, rng, max_dim)
        return random_morphism(source, quot, rng)
    if u < 0.7 and quot.dim:
        sub, incl = random_submodule(quot, rng)
        return incl
    return split_epi_onto(quot, rng, max_dim) if quot.dim else random_morphism(zero_module(quot.algebra), quot, rng)


def _commuting_pairs(left_basis, right_basis, constraint, tol):
    """Random ``(g, h)`` from the spans with ``constraint(g, h) = 0`` (linear in both)."""
    blocks = [constraint(g, None) for g in left_basis] + [constraint(None, h) for h in right_basis]
    if not blocks:
        return None
    system = np.array([b.reshape(-1) for b in blocks]).T
    ns = null_space(system, tol) if system.shape[0] else np.eye(len(blocks), dtype=complex)
    return ns


def random_cone(square, source, rng):
    """Maps ``g_l: X -> E``, ``g_r: X -> F`` with ``f_l g_l = f_r g_r`` (not built from the legs)."""
    fl, fr = square.f_left, square.f_right
    hl, hr = hom_basis(source, fl.src), hom_basis(source, fr.src)
    ns = _commuting_pairs(
        hl, hr,
        lambda g, h: fl.matrix @ g if h is None else -fr.matrix @ h,
        source.tol,
    )
    if ns is None or ns.shape[1] == 0:
        return None
    c = ns @ _cnormal(rng, ns.shape[1])
    gl = np.tensordot(c[: len(hl)], hl, axes=(0, 0)) if len(hl) else np.zeros((fl.src.dim, source.dim), complex)
    gr = np.tensordot(c[len(hl):], hr, axes=(0, 0)) if len(hr) else np.zeros((fr.src.dim, source.dim), complex)
    return ModMorphism(source, fl.src, gl), ModMorphism(source, fr.src, gr)


def random_cocone(square, target, rng):
    """Maps ``k_l: E -> Y``, ``k_r: F -> Y`` with ``k_l f_l = k_r f_r``."""
    fl, fr = square.f_left, square.f_right
    hl, hr = hom_basis(fl.dst, target), hom_basis(fr.dst, target)
    ns = _commuting_pairs(
        hl, hr,
        lambda k, h: k @ fl.matrix if h is None else -h @ fr.matrix,
        target.tol,
    )
    if ns is None or ns.shape[1] == 0:
        return None
    c = ns @ _cnormal(rng, ns.shape[1])
    kl = np.tensordot(c[: len(hl)], hl, axes=(0, 0)) if len(hl) else np.zeros((target.dim, fl.dst.dim), complex)
    kr = np.tensordot(c[len(hl):], hr, axes=(0, 0)) if len(hr) else np.zeros((target.dim, fr.dst.dim), complex)
    return ModMorphism(fl.dst, target, kl), ModMorphism(fr.dst, target, kr)


def cone_residual(square, rng, samples=1):
    """Worst mediator defect over sampled cones: legs, equivariance and uniqueness."""
    worst = 0.0
    for _ in range(samples):
        test = random_module(square.module.algebra, rng, 4)
        cone = random_cone(square, test, rng)
        if cone is None:
            continue
        gl, gr = cone
        med, res = pullback_mediator(square, gl, gr)
        scale = max(1.0, float(np.linalg.norm(gl.matrix)) + float(np.linalg.norm(gr.matrix)))
        worst = max(worst, res / scale, med.equivariance_residual(full=True) / scale)
    return worst


def cocone_residual(square, rng, samples=1):
    worst = 0.0
    for _ in range(samples):
        test = random_module(square.module.algebra, rng, 4)
        cocone = random_cocone(square, test, rng)
        if cocone is None:
            continue
        kl, kr = cocone
        med, res = pushout_mediator(square, kl, kr)
        scale = max(1.0, float(np.linalg.norm(kl.matrix)) + float(np.linalg.norm(kr.matrix)))
        worst = max(worst, res / scale, med.equivariance_residual(full=True) / scale)
    return worst


def axiom_e2(algebra, structure, rng, max_dim=8):
    """Pushouts of admissible monos along arbitrary maps are admissible monos."""
    mono = fresh_mono(algebra, structure, rng, max_dim)
    f = random_map_from(mono.src, rng, max_dim)
    square = pushout(mono, f)
    ok, res = _combine(_verdict(pair_from_mono(mono), structure), _verdict(pair_from_mono(square.leg_right), structure))
    res = max(res, square.commutes, cocone_residual(square, rng))
    return ok and square.kernel_preserved is not False, res


def axiom_e2op(algebra, structure, rng, max_dim=8):
    """Pullbacks of admissible epis along arbitrary maps are admissible epis."""
    epi = fresh_epi(algebra, structure, rng, max_dim)
    g = random_map_into(epi.dst, rng, max_dim)
    square = pullback(epi, g)
    ok, res = _combine(_verdict(pair_from_epi(epi), structure), _verdict(pair_from_epi(square.leg_right), structure))
    res = max(res, square.commutes, cone_residual(square, rng))
    return ok and square.cokernel_preserved is not False, res


def axiom_iso(algebra, structure, rng, max_dim=8):
    """Membership is invariant under conjugation by module isomorphisms."""
    pair = random_pair(algebra, rng, max_dim, structure)
    before = classify_pair(pair, sample_universal=False)
    moved = pair.conjugate(
        random_automorphism(pair.sub, rng), random_automorphism(pair.middle, rng), random_automorphism(pair.quotient, rng)
    )
    after = classify_pair(moved, sample_universal=False)
    ok, res = _verdict(moved, structure)
    return ok and before.flags == after.flags and before.member(structure), res
