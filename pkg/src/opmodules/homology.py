"""Relative projectivity and injectivity, resolutions and global dimension zero.

Projectivity of ``E`` is decided by the single canonical epi
``P: E (x) A -> E``; injectivity by the canonical embedding
``iota: E -> Hom(A, E)``.  Both splitting problems decouple: as modules
``E (x) A`` is ``dim E`` copies of ``A`` and ``Hom(A, E)`` is ``dim E``
copies of the dual module ``A*``, so a section (retraction) is a family of
module maps ``E -> A`` (``A* -> E``) and only the identity constraint
couples them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import build_from_basis, is_semisimple, matrix_units, radical
from .errors import InputError, SearchFailedError
from .exact import KernelCokernelPair, SplitCertificate, classify_pair, pair_from_mono, split_module
from .haagerup import canonical_projection
from .modules import (
    ModMorphism,
    OpModule,
    canonical_embedding,
    compose,
    direct_sum_module,
    evaluation_at_unit,
    generated_submodule,
    hom_basis,
    hom_module,
    quotient_module,
    regular_module,
    submodule,
)
from .numerics import canonical_basis, complement_basis, null_space, range_basis, rank, resolve_tol, solve_affine
from .opspace import Concrete, HomSpace, LevelNorm, LinearMap, cb_norm_estimate


def _greedy_span(vectors_of, count, dim, tol):
    """Indices ``e`` in order whose vector blocks ``vectors_of(e)`` add rank, until rank ``dim``."""
    chosen, span = [], np.zeros((dim, 0), complex)
    for e in range(count):
        block = vectors_of(e)
        fresh = range_basis(block - span @ (span.conj().T @ block), tol)
        if fresh.shape[1]:
            chosen.append(e)
            span = np.hstack([span, fresh])
            span = np.linalg.qr(span)[0]
        if span.shape[1] >= dim:
            break
    return chosen


def _generic_frame(dim):
    """Fixed random unitary; its columns are generic directions in C^dim."""
    rng = np.random.default_rng(dim)
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _solve_family(blocks, dim, tol):
    """Solve ``sum_t lam_t blocks[t] = I`` (``blocks`` of shape ``(q, dim, dim)``)."""
    rhs = np.eye(dim, dtype=complex).reshape(-1)
    if len(blocks) == 0:
        witness = rhs / np.linalg.norm(rhs)
        return None, witness, float(np.linalg.norm(rhs))
    system = blocks.reshape(len(blocks), -1).T
    sol = solve_affine(system, rhs, tol)
    if not sol.feasible:
        return None, sol.witness, sol.residual
    return sol.solution, None, sol.residual


# -- projectivity ------------------------------------------------------------------


@dataclass
class ProjectivityVerdict:
    projective: bool
    section: ModMorphism | None
    witness: np.ndarray | None
    residuals: dict = field(default_factory=dict)

    def __bool__(self):
        return self.projective


def is_rel_projective(module):
    """Equivariant section of ``P: E (x) A -> E``, or an infeasibility witness.

    For any basis ``f_v`` of ``E`` a section is ``x -> sum_v f_v (x) s_v(x)``
    with ``s_v`` in ``Hom_A(E, A)``; ``P s = id`` reads
    ``sum_{v,j} s_v(x)_j (f_v . b_j) = x``.  Only the ``f_v`` of a generating
    set carry ``s_v != 0``: if ``E`` is projective the epi from that free
    summand already splits, so nothing is lost.  A generic unitary frame
    keeps the generating set small.
    """
    alg, tol = module.algebra, module.tol
    de, da = module.dim, alg.dim
    cp = canonical_projection(module)
    if de == 0:
        return ProjectivityVerdict(True, ModMorphism(module, cp.tensor, np.zeros((0, 0))), None, {"section": 0.0})
    h = hom_basis(module, regular_module(alg))
    # generic directions generate with as few vectors as possible
    frame = _generic_frame(de)
    moved = np.einsum("jke,ev->jkv", module.action, frame)
    gens = _greedy_span(lambda v: moved[:, :, v].T, de, de, tol)
    # blocks[(v, t)][k, i] = sum_j (R_j f_v)[k] h_t[j, i]
    blocks = np.einsum("jkv,tji->vtki", moved[:, :, gens], h).reshape(-1, de, de)
    lam, witness, res = _solve_family(blocks, de, tol)
    if lam is None:
        return ProjectivityVerdict(False, None, witness, {"solve": res, "hom_dim": len(h), "generators": len(gens)})
    full = frame[:, gens] @ lam.reshape(len(gens), len(h))
    mat = np.einsum("et,tji->eji", full, h).reshape(de * da, de)
    section = ModMorphism(module, cp.tensor, mat)
    residuals = {
        "section": float(np.linalg.norm(cp.projection.matrix @ mat - np.eye(de))),
        "equivariance": section.equivariance_residual(full=True),
    }
    ok = max(residuals.values()) < 1e3 * tol.exact_residual * max(1.0, float(np.linalg.norm(mat)))
    return ProjectivityVerdict(ok, section if ok else None, None, residuals)


# -- injectivity -------------------------------------------------------------------


def dual_regular_module(algebra):
    """``A* = Hom(A, C)`` with ``(tau . a)(b) = tau(ab)``."""
    scalars = Concrete(np.ones((1, 1, 1), complex), tol=algebra.tol)
    action = np.transpose(algebra.left_mult, (0, 2, 1))
    return OpModule(HomSpace(algebra, scalars), algebra, action, name="A*")


@dataclass
class InjectivityVerdict:
    injective: bool
    retraction: ModMorphism | None
    witness: np.ndarray | None
    residuals: dict = field(default_factory=dict)

    def __bool__(self):
        return self.injective


def is_rel_injective(module, hom=None):
    """Equivariant retraction of ``iota: E -> Hom(A, E)``, or a witness.

    ``iota`` is certified admissible by the linear retraction ``T -> T(1)``.
    Only coordinates ``e`` from a cogenerating set carry ``r_e != 0``, dually
    to the projective case.
    """
    alg, tol = module.algebra, module.tol
    de, da = module.dim, alg.dim
    hom, iota = canonical_embedding(module, hom)
    ev = evaluation_at_unit(module, hom)
    residuals = {"linear_retraction": float(np.linalg.norm(ev.matrix @ iota.matrix - np.eye(de))) if de else 0.0}
    if de == 0:
        return InjectivityVerdict(True, ModMorphism(hom, module, np.zeros((0, 0))), None, residuals)
    g = hom_basis(dual_regular_module(alg), module)
    # N_e[j, i] = R_j[e, i]
    n_e = np.transpose(module.action, (1, 0, 2))
    cogens = _greedy_span(lambda e: n_e[e].conj().T, de, de, tol)
    blocks = np.einsum("tkj,eji->etki", g, n_e[cogens]).reshape(-1, de, de)
    mu, witness, res = _solve_family(blocks, de, tol)
    if mu is None:
        residuals.update(solve=res, hom_dim=len(g), cogenerators=cogens)
        return InjectivityVerdict(False, None, witness, residuals)
    full = np.zeros((de, len(g)), complex)
    full[cogens] = mu.reshape(len(cogens), len(g))
    mat = np.einsum("et,tkj->kej", full, g).reshape(de, de * da)
    retraction = ModMorphism(hom, module, mat)
    residuals["retraction"] = float(np.linalg.norm(mat @ iota.matrix - np.eye(de)))
    residuals["equivariance"] = retraction.equivariance_residual(full=True)
    ok = max(residuals["retraction"], residuals["equivariance"]) < 1e3 * tol.exact_residual * max(1.0, float(np.linalg.norm(mat)))
    return InjectivityVerdict(ok, retraction if ok else None, None, residuals)


# -- the matrix-unit retraction ----------------------------------------------------


@dataclass
class RetractionPiece:
    block: int
    index: int
    map: LinearMap
    cb: object
    bound: float = 1.0


def semisimple_retraction(module, levels=4, samples=4, estimate_cb=True):
    """``r(T) = sum_k sum_i T(e^k_{i1}) . e^k_{1i}`` and ``s = iota``.

    Returns ``(r, s, diagnostics)``; diagnostics hold ``|r s - id|``, the
    equivariance defect on every matrix unit, per-piece sampled cb estimates
    and the bound ``|e_{i1}| |e_{1i}|`` that holds for every piece.  When the
    norms of E need conic solves, generic elements of Hom(A, E) are too costly
    to norm and the pieces are sampled on the image of iota instead.
    """
    alg = module.algebra
    blocks = matrix_units(alg)
    de, da = module.dim, alg.dim
    hom, iota = canonical_embedding(module, hom_module(alg, module))
    total = np.zeros((de, de * da), complex)
    pieces = []
    units = [(k, i) for k, m in enumerate(blocks.sizes) for i in range(m)]
    on_image = None
    if estimate_cb and de and not module.space.exact_norms:
        on_image = _pieces_on_image(module, [blocks.unit(k, i, i) for k, i in units], levels, samples)
    for n_p, (k, i) in enumerate(units):
        evaluate = np.kron(np.eye(de), blocks.unit(k, i, 0).reshape(1, da))
        piece = module.action_of(blocks.unit(k, 0, i)) @ evaluate
        total += piece
        lin = LinearMap(hom.space, module.space, piece)
        cb = None
        if on_image is not None:
            cb = on_image[n_p]
        elif estimate_cb and de:
            cb = cb_norm_estimate(lin, level_cap=levels, samples=samples, basis_trials=False)
        # evaluation at e_{i1} then acting by e_{1i}: each is completely bounded by the unit's norm
        bound = alg.norm(blocks.unit(k, i, 0)) * alg.norm(blocks.unit(k, 0, i))
        pieces.append(RetractionPiece(k, i, lin, cb, bound))
    r = ModMorphism(hom, module, total)
    unit_defect = 0.0
    for _, _, _, e in blocks.all_units():
        # r(T . e) against r(T) . e
        unit_defect = max(unit_defect, float(np.linalg.norm(total @ hom.action_of(e) - module.action_of(e) @ total)))
    diagnostics = {
        "rs_residual": float(np.linalg.norm(total @ iota.matrix - np.eye(de))) if de else 0.0,
        "equivariance": unit_defect,
        "pieces": pieces,
        "max_piece_cb": max((p.cb.value for p in pieces if p.cb is not None), default=0.0),
        "max_piece_bound": max((p.bound for p in pieces), default=0.0),
    }
    return r, iota, diagnostics


def _pieces_on_image(module, idempotents, levels, samples, seed=0):
    """Running ratios ``|x . e_ii|_n / |x|_n`` per piece, levels ``1..levels``.

    ``r_i(iota(x)) = x . e_ii`` and iota is a complete isometry for unital A,
    so every ratio is a lower estimate of ``|r_i|_cb``.  Trials thin out as
    ``samples // n`` with the level, since each norm is a conic solve.
    """
    rng = np.random.default_rng(seed)
    acts = [module.action_of(e).T for e in idempotents]
    running = [0.0] * len(acts)
    running_lower = [0.0] * len(acts)
    per_level = [[] for _ in acts]
    for n in range(1, levels + 1):
        for _ in range(max(1, samples // n)):
            x = module.space.random_element(rng, n)
            nx = module.space.matrix_norm(x)
            if nx.value <= 0:
                continue
            for p, act in enumerate(acts):
                ny = module.space.matrix_norm(x @ act)
                running[p] = max(running[p], ny.value / nx.value)
                if nx.upper > 0:
                    running_lower[p] = max(running_lower[p], ny.lower / nx.upper)
        for p in range(len(acts)):
            per_level[p].append(running[p])
    return [
        LevelNorm(levels, running[p], running_lower[p], 1.0, per_level=tuple(per_level[p]))
        for p in range(len(acts))
    ]


# -- resolutions and dimension -----------------------------------------------------


@dataclass
class ResolutionStep:
    injective: OpModule
    embedding: ModMorphism
    pair: KernelCokernelPair
    admissible: bool
    differential: ModMorphism | None = None


@dataclass
class Resolution:
    base: OpModule
    steps: list
    length: int | None
    truncated: bool
    verdicts: list

    @property
    def admissible(self):
        return all(s.admissible for s in self.steps)


def _embedding(module, rng):
    """``E -> Hom(A, E)``, or with ``rng`` ``E -> Hom(A, E) (+) Hom(A, G)`` via ``(iota, iota_G f)``."""
    hom, iota = canonical_embedding(module)
    if rng is None:
        return iota
    from .sampling import random_module, random_morphism

    other = random_module(module.algebra, rng, 3, allow_zero=False)
    f = random_morphism(module, other, rng)
    hom_g, iota_g = canonical_embedding(other)
    s = direct_sum_module(hom, hom_g)
    mat = np.vstack([iota.matrix, iota_g.matrix @ f.matrix])
    return ModMorphism(module, s.module, mat)


def rel_injective_resolution(module, length_cap=4, seed=None):
    """``E -> I^0 -> I^1 -> ...`` by iterated embeddings into injectives.

    Stops at the first rel-injective cokernel.  ``seed`` selects a different
    (but equally valid) choice of injectives.
    """
    rng = np.random.default_rng(seed) if seed is not None else None
    steps, verdicts = [], []
    current = module
    for m in range(length_cap + 1):
        verdict = is_rel_injective(current)
        verdicts.append(verdict)
        if verdict.injective:
            _link(steps)
            return Resolution(module, steps, m, False, verdicts)
        if m == length_cap:
            break
        mono = _embedding(current, rng)
        pair = pair_from_mono(mono)
        membership = classify_pair(pair, sample_universal=False, structures=("rel",))
        steps.append(ResolutionStep(mono.dst, mono, pair, bool(membership.e_rel)))
        current = pair.quotient
    _link(steps)
    return Resolution(module, steps, None, True, verdicts)


def _link(steps):
    # d^m = iota_{m+1} pi_{m+1}
    for a, b in zip(steps, steps[1:]):
        a.differential = compose(b.embedding, a.pair.pi)


@dataclass
class DimensionReport:
    module: OpModule
    idim: int | None
    infinite_at_cap: bool
    resolution: Resolution
    cross_check: int | None
    agrees: bool
    algebraic_idim: int | None


def rel_injective_dimension(module, cap=4, seed=1):
    """First ``m`` whose ``m``-th cosyzygy is rel-injective.

    A second resolution with randomized injectives must report the same
    number.  ``algebraic_idim`` is computed independently as the projective
    dimension of the dual left module.
    """
    res = rel_injective_resolution(module, cap)
    other = rel_injective_resolution(module, cap, seed=seed)
    alg_dim = algebraic_injective_dimension(module, cap)
    return DimensionReport(
        module, res.length, res.truncated, res, other.length, res.length == other.length, alg_dim
    )


def _intertwiners(src, dst, tol):
    """Basis of ``{X : X src_g = dst_g X}`` with ``X`` of shape ``(d_dst, d_src)``."""
    ds, dd = src[0].shape[0], dst[0].shape[0]
    rows = [np.kron(np.eye(dd), s.T) - np.kron(d, np.eye(ds)) for s, d in zip(src, dst)]
    basis = null_space(np.vstack(rows), tol) if rows else np.eye(dd * ds, dtype=complex)
    return basis.T.reshape(-1, dd, ds)


def algebraic_injective_dimension(module, cap=4):
    """Injective dimension of the underlying algebraic module.

    ``E`` is injective iff the dual left module ``E*`` is projective; a
    projective resolution of ``E*`` by syzygies of ``A (x) E* -> E*`` gives
    the number.  Norms play no role.
    """
    alg, tol = module.algebra, module.tol
    if alg.dim == 1 or module.dim == 0:
        return 0
    gens = alg.generators
    reg = [alg.left_operator(g) for g in gens]
    # left action on E*: a . phi = phi o R_a, i.e. R_a^T on coordinates
    full = [r.T for r in module.action]
    for m in range(cap + 1):
        d = full[0].shape[0]
        if d == 0:
            return m
        acts = [np.tensordot(g, np.array(full), axes=(0, 0)) for g in gens]
        h = _intertwiners(acts, reg, tol)
        # mult(b_j (x) v) = L_j v; section v -> sum_w b . h_w(v) (x) e_w
        blocks = np.einsum("jkw,tji->wtki", np.array(full), h).reshape(-1, d, d) if len(h) else np.zeros((0, d, d))
        lam, _, _ = _solve_family(blocks, d, tol)
        if lam is not None:
            return m
        mult = np.hstack(full)  # columns (j, v)
        syz = null_space(mult, tol)
        # A (x) E* with b_i acting by left_mult[i] (x) I, coordinates (j, v)
        big = [np.kron(alg.left_mult[i], np.eye(d)) for i in range(alg.dim)]
        full = [syz.conj().T @ b @ syz for b in big]
    return None


# -- global dimension zero -----------------------------------------------------------


@dataclass
class WitnessReport:
    ideal: np.ndarray
    quotient: OpModule
    pair: KernelCokernelPair
    split: SplitCertificate
    s_ideal: np.ndarray
    s_one: np.ndarray
    s_two: np.ndarray
    s_agree: bool
    s_two_sided: bool
    annihilator: np.ndarray
    quotient_algebra: object
    maps: np.ndarray
    maximal: bool
    log: list


def _max_right_ideals(algebra, rng):
    """One maximal right ideal per simple block of ``A / rad A``.

    With ``Q`` an orthonormal complement of the radical, a rank-one spectral
    idempotent ``f`` of ``A / rad`` gives ``I = {x : f x in rad}``.
    """
    tol = algebra.tol
    rad = radical(algebra)
    q = complement_basis(rad, algebra.dim)

    def mult(x, y):
        return q.conj().T @ algebra.multiply(q @ x, q @ y)

    dim_b = q.shape[1]
    eye = np.eye(dim_b, dtype=complex)
    unit_b = q.conj().T @ algebra.unit_coords
    left = np.array([np.array([mult(eye[i], eye[k]) for k in range(dim_b)]).T for i in range(dim_b)])
    right = np.array([np.array([mult(eye[k], eye[i]) for k in range(dim_b)]).T for i in range(dim_b)])
    center = null_space(np.vstack([left[i] - right[i] for i in range(dim_b)]), tol)
    z = center @ (rng.normal(size=center.shape[1]) + 1j * rng.normal(size=center.shape[1]))
    idempotents = _spectral_idempotents(z, unit_b, mult, np.tensordot(z, left, axes=(0, 0)), tol)
    out = []
    for e in idempotents:
        corner = range_basis(np.array([mult(mult(e, eye[k]), e) for k in range(dim_b)]).T, tol)
        y = corner @ (rng.normal(size=corner.shape[1]) + 1j * rng.normal(size=corner.shape[1]))
        y = mult(mult(e, y), e)
        ly = np.tensordot(y, left, axes=(0, 0))
        spectral = _spectral_idempotents(y, e, mult, ly, tol, restrict=corner)
        f = spectral[0]
        lf = algebra.left_operator(q @ f)
        ideal = canonical_basis(null_space(q.conj().T @ lf, tol), tol)
        out.append((f, ideal))
    return out


def _spectral_idempotents(z, unit, mult, lz, tol, restrict=None):
    """Lagrange idempotents ``prod (z - l_j)/(l_i - l_j)`` over the spectrum of ``z``."""
    op = lz if restrict is None else restrict.conj().T @ lz @ restrict
    eig = np.linalg.eigvals(op)
    distinct = []
    for lam in eig:
        if all(abs(lam - mu) > 1e-6 for mu in distinct):
            distinct.append(lam)
    out = []
    for i, li in enumerate(distinct):
        p = unit.copy()
        for j, lj in enumerate(distinct):
            if j != i:
                p = mult(p, z - lj * unit) / (li - lj)
        if np.linalg.norm(p) > tol.exact_residual and np.linalg.norm(mult(p, p) - p) < 1e-6 * max(1.0, np.linalg.norm(p)):
            out.append(p)
    return out


def _simple_quotient(module, tol):
    """Every basis vector and a random vector generate the module."""
    rng = np.random.default_rng(0)
    probes = list(np.eye(module.dim, dtype=complex)) + [rng.normal(size=module.dim) + 1j * rng.normal(size=module.dim)]
    return all(generated_submodule(module, v.reshape(-1, 1)).shape[1] == module.dim for v in probes)


def non_projective_witness(algebra, seed=0):
    """Maximal right ideal ``I`` whose pair ``I -> A -> A/I`` does not split."""
    tol = algebra.tol
    rad = radical(algebra)
    if rad.shape[1] == 0:
        raise InputError("the algebra is semisimple; every module is projective")
    rng = np.random.default_rng(seed)
    reg = regular_module(algebra)
    log = []
    for f, ideal in _max_right_ideals(algebra, rng):
        sub, incl = submodule(reg, ideal)
        quot, proj = quotient_module(reg, ideal)
        pair = KernelCokernelPair(incl, proj)
        cert = split_module(pair)
        maximal = _simple_quotient(quot, tol)
        log.append({"codim": quot.dim, "splits": cert.split, "maximal": maximal})
        if cert.split:
            continue
        return _witness_report(algebra, ideal, quot, pair, cert, maximal, log)
    raise SearchFailedError("no non-split maximal right ideal among the candidates", log)


def _witness_report(algebra, ideal, quot, pair, cert, maximal, log):
    tol = algebra.tol
    reg = regular_module(algebra)
    # left annihilator {a : a x = 0 for x in I}
    stacked = np.vstack([algebra.right_operator(x) for x in ideal.T])
    ann = null_space(stacked, tol)
    prods = [algebra.multiply(a, np.eye(algebra.dim)[j]) for a in ann.T for j in range(algebra.dim)]
    s_two = range_basis(np.array(prods).T, tol) if prods else np.zeros((algebra.dim, 0))
    maps = hom_basis(quot, reg)
    images = np.hstack(list(maps)) if len(maps) else np.zeros((algebra.dim, 0))
    s_one = range_basis(images, tol) if images.size else np.zeros((algebra.dim, 0))
    joint = rank(np.hstack([s_one, s_two]), tol) if s_one.size + s_two.size else 0
    agree = joint == s_one.shape[1] == s_two.shape[1]
    two_sided = True
    proj = np.eye(algebra.dim) - s_one @ s_one.conj().T
    for j in range(algebra.dim):
        for op in (algebra.left_mult[j], algebra.right_mult[j]):
            if s_one.size and np.linalg.norm(proj @ op @ s_one) > 1e3 * tol.exact_residual:
                two_sided = False
    annihilator = null_space(quot.action.reshape(algebra.dim, -1).T, tol)
    image_basis = complement_basis(annihilator, algebra.dim)
    mats = [np.tensordot(c, np.transpose(quot.action, (0, 2, 1)), axes=(0, 0)) for c in image_basis.T]
    b_alg = build_from_basis(quot.dim, mats, tol=tol, name="A/ann(A/I)") if quot.dim else None
    return WitnessReport(
        ideal, quot, pair, cert, s_one, s_one, s_two, agree, two_sided, annihilator, b_alg, maps, maximal, log
    )


@dataclass
class GlobalDimVerdict:
    answer: str
    semisimple: bool
    certificates: list
    witness: WitnessReport | None
    agrees: bool
    family_size: int

    @property
    def zero(self):
        return self.answer == "YES"


def global_dim_zero_certificate(algebra, family=None, count=50, seed=0, max_dim=8):
    """YES with per-module certificates, or NO with a non-projective witness.

    Over a semisimple algebra the family (random modules when not given)
    must be rel-injective and rel-projective throughout; otherwise the
    verdicts disagree with the radical test and ``agrees`` is false.
    """
    semisimple = is_semisimple(algebra)
    if not semisimple:
        witness = non_projective_witness(algebra, seed=seed)
        return GlobalDimVerdict("NO", False, [], witness, not witness.split.split, 0)
    if family is None:
        from .sampling import random_module

        rng = np.random.default_rng(seed)
        family = [random_module(algebra, rng, max_dim) for _ in range(count)]
    certs = []
    for module in family:
        inj, proj = is_rel_injective(module), is_rel_projective(module)
        certs.append((module, inj, proj))
    agrees = all(i.injective and p.projective for _, i, p in certs)
    return GlobalDimVerdict("YES" if agrees else "NO", True, certs, None, agrees, len(certs))
