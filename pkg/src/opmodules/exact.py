"""Kernel-cokernel pairs and the exact structures E_min, E_rel, E_max.

A pair ``K --mu--> E --pi--> C`` belongs to

* ``max`` when it is a kernel-cokernel pair,
* ``rel`` when moreover it splits as a pair of linear maps,
* ``min`` when it splits as a pair of module maps.

Splittings are found by one linear solve each; an infeasible solve returns
a left-null witness of the linear system.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NotAdmissibleError
from .modules import (
    ModMorphism,
    cokernel,
    compose,
    factor_through_epi,
    factor_through_mono,
    kernel,
    submodule,
    zero_module,
    zero_morphism,
)
from .numerics import complement_basis, null_space, range_basis, rank, resolve_tol, solve_affine
from .opspace import Subspace, cb_norm_estimate, LinearMap


STRUCTURES = ("min", "rel", "max")


def normalize_structure(name):
    key = str(name).lower().replace("e_", "").replace("e-", "")
    if key not in STRUCTURES:
        raise InputError(f"unknown exact structure {name!r}; use one of min, rel, max")
    return key


@dataclass
class KernelCokernelPair:
    mu: ModMorphism
    pi: ModMorphism

    @property
    def sub(self):
        return self.mu.src

    @property
    def middle(self):
        return self.mu.dst

    @property
    def quotient(self):
        return self.pi.dst

    @property
    def tol(self):
        return self.mu.src.tol

    def conjugate(self, phi_k, phi_e, phi_c):
        """Pair transported along isomorphisms of K, E and C."""
        inv_k = np.linalg.inv(phi_k.matrix) if phi_k.matrix.size else phi_k.matrix
        inv_e = np.linalg.inv(phi_e.matrix) if phi_e.matrix.size else phi_e.matrix
        mu = ModMorphism(self.mu.src, self.mu.dst, phi_e.matrix @ self.mu.matrix @ inv_k)
        pi = ModMorphism(self.pi.src, self.pi.dst, phi_c.matrix @ self.pi.matrix @ inv_e)
        return KernelCokernelPair(mu, pi)


@dataclass
class PairCheck:
    ok: bool
    diagnostics: dict

    def __bool__(self):
        return self.ok


def pair_from_mono(mu):
    _, pi = cokernel(mu)
    return KernelCokernelPair(mu, pi)


def pair_from_epi(pi):
    _, mu = kernel(pi)
    return KernelCokernelPair(mu, pi)


def _lstsq_residual(mat, rhs):
    """Residual of the best ``X`` with ``mat @ X = rhs``."""
    if rhs.size == 0:
        return 0.0
    if mat.shape[1] == 0:
        return float(np.linalg.norm(rhs))
    x, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
    return float(np.linalg.norm(mat @ x - rhs))


def is_kernel_cokernel_pair(mu, pi, sample_universal=True):
    """Rank test for a kernel-cokernel pair, with the universal arrows checked.

    At finite dimension ``pi mu = 0``, ``mu`` injective, ``pi`` surjective and
    ``rank mu + rank pi = dim E`` characterize kernel-cokernel pairs.  The
    canonical kernel of ``pi`` and cokernel of ``mu`` are additionally
    factored through ``mu`` and ``pi``.
    """
    diag = {}
    if mu.dst.dim != pi.src.dim:
        return PairCheck(False, {"composable": False})
    tol = resolve_tol(mu.src.tol)
    scale = max(1.0, float(np.linalg.norm(mu.matrix)) * float(np.linalg.norm(pi.matrix)))
    comp = float(np.linalg.norm(pi.matrix @ mu.matrix)) if mu.matrix.size and pi.matrix.size else 0.0
    rk_mu = rank(mu.matrix, tol) if mu.matrix.size else 0
    rk_pi = rank(pi.matrix, tol) if pi.matrix.size else 0
    diag.update(
        composite_residual=comp,
        mu_injective=rk_mu == mu.src.dim,
        pi_surjective=rk_pi == pi.dst.dim,
        image_is_kernel=rk_mu + rk_pi == mu.dst.dim,
    )
    ok = comp <= tol.exact_residual * scale and diag["mu_injective"] and diag["pi_surjective"] and diag["image_is_kernel"]
    if ok and sample_universal:
        # the canonical arrows only enter through their matrices
        ker_incl = null_space(pi.matrix, tol) if pi.dst.dim else np.eye(pi.src.dim, dtype=complex)
        image = range_basis(mu.matrix, tol) if mu.src.dim else np.zeros((mu.dst.dim, 0), complex)
        coker_proj = complement_basis(image, mu.dst.dim, tol).conj().T
        res_k = _lstsq_residual(mu.matrix, ker_incl)
        res_c = _lstsq_residual(pi.matrix.T, coker_proj.T)
        diag["kernel_factor_residual"] = res_k
        diag["cokernel_factor_residual"] = res_c
        ok = max(res_k, res_c) <= 1e3 * tol.exact_residual * scale
    if not ok and comp > tol.exact_residual * scale:
        diag["reason"] = "pi o mu is not zero"
    elif not ok and not diag["image_is_kernel"]:
        diag["reason"] = "image of mu differs from the kernel of pi"
    elif not ok:
        diag["reason"] = "mu not injective or pi not surjective"
    return PairCheck(ok, diag)


# -- splittings ------------------------------------------------------------------


@dataclass
class SplitCertificate:
    """``kind`` is ``module-split``, ``linear-split`` or ``none``."""

    kind: str
    section: ModMorphism | np.ndarray | None = None
    retraction: ModMorphism | np.ndarray | None = None
    residuals: dict = field(default_factory=dict)
    witness: np.ndarray | None = None
    cb_estimate: float | None = None

    @property
    def split(self):
        return self.kind != "none"

    def __bool__(self):
        return self.split


def _equivariance_rows(src, dst):
    """Rows of ``X R^src_g - R^dst_g X = 0`` on vec(X), X of shape dst x src."""
    ds, dd = src.dim, dst.dim
    rows = [
        np.kron(np.eye(dd), rs.T) - np.kron(rd, np.eye(ds))
        for rs, rd in zip(src.generator_actions, dst.generator_actions)
    ]
    return rows


def _stack(blocks, ncols):
    blocks = [b for b in blocks if b.shape[0]]
    if not blocks:
        return np.zeros((0, ncols), complex)
    return np.vstack(blocks)


def retraction_system(pair):
    """Linear system for an equivariant ``rho: E -> K`` with ``rho mu = id``."""
    k, e = pair.sub.dim, pair.middle.dim
    rows = _equivariance_rows(pair.middle, pair.sub)
    ident = np.kron(np.eye(k), pair.mu.matrix.T)
    a = _stack(rows + [ident], k * e)
    b = np.concatenate([np.zeros(a.shape[0] - k * k, complex), np.eye(k).reshape(-1)])
    return a, b


def section_system(pair):
    """Linear system for an equivariant ``sigma: C -> E`` with ``pi sigma = id``."""
    e, c = pair.middle.dim, pair.quotient.dim
    rows = _equivariance_rows(pair.quotient, pair.middle)
    ident = np.kron(pair.pi.matrix, np.eye(c))
    a = _stack(rows + [ident], e * c)
    b = np.concatenate([np.zeros(a.shape[0] - c * c, complex), np.eye(c).reshape(-1)])
    return a, b


def quintuplet_system(pair):
    """Joint system in ``(rho, sigma)`` for a direct-sum decomposition of E."""
    k, e, c = pair.sub.dim, pair.middle.dim, pair.quotient.dim
    nr, ns = k * e, e * c
    blocks, rhs = [], []
    for row in _equivariance_rows(pair.middle, pair.sub):
        blocks.append(np.hstack([row, np.zeros((row.shape[0], ns))]))
        rhs.append(np.zeros(row.shape[0]))
    for row in _equivariance_rows(pair.quotient, pair.middle):
        blocks.append(np.hstack([np.zeros((row.shape[0], nr)), row]))
        rhs.append(np.zeros(row.shape[0]))
    blocks.append(np.hstack([np.kron(np.eye(k), pair.mu.matrix.T), np.zeros((k * k, ns))]))
    rhs.append(np.eye(k).reshape(-1))
    blocks.append(np.hstack([np.zeros((c * c, nr)), np.kron(pair.pi.matrix, np.eye(c))]))
    rhs.append(np.eye(c).reshape(-1))
    blocks.append(np.hstack([np.kron(pair.mu.matrix, np.eye(e)), np.kron(np.eye(e), pair.pi.matrix.T)]))
    rhs.append(np.eye(e).reshape(-1))
    return _stack(blocks, nr + ns), np.concatenate(rhs).astype(complex)


def solve_retraction(pair):
    a, b = retraction_system(pair)
    sol = solve_affine(a, b, pair.tol)
    if not sol.feasible:
        return None, sol
    return ModMorphism(pair.middle, pair.sub, sol.solution.reshape(pair.sub.dim, pair.middle.dim)), sol


def solve_section(pair):
    a, b = section_system(pair)
    sol = solve_affine(a, b, pair.tol)
    if not sol.feasible:
        return None, sol
    return ModMorphism(pair.quotient, pair.middle, sol.solution.reshape(pair.middle.dim, pair.quotient.dim)), sol


def solve_quintuplet(pair):
    a, b = quintuplet_system(pair)
    sol = solve_affine(a, b, pair.tol)
    if not sol.feasible:
        return None, sol
    k, e, c = pair.sub.dim, pair.middle.dim, pair.quotient.dim
    rho = ModMorphism(pair.middle, pair.sub, sol.solution[: k * e].reshape(k, e))
    sigma = ModMorphism(pair.quotient, pair.middle, sol.solution[k * e:].reshape(e, c))
    return (rho, sigma), sol


def _split_residuals(pair, rho, sigma):
    k, e, c = pair.sub.dim, pair.middle.dim, pair.quotient.dim
    mu, pi = pair.mu.matrix, pair.pi.matrix
    return {
        "retraction": float(np.linalg.norm(rho @ mu - np.eye(k))) if k else 0.0,
        "section": float(np.linalg.norm(pi @ sigma - np.eye(c))) if c else 0.0,
        "decomposition": float(np.linalg.norm(mu @ rho + sigma @ pi - np.eye(e))) if e else 0.0,
    }


def split_module(pair):
    """Equivariant splitting of a pair, or a witness that none exists.

    One solve for the retraction; the section ``(1 - mu rho) s`` is then
    equivariant for any linear section ``s`` of ``pi``.
    """
    rho, sol = solve_retraction(pair)
    if rho is None:
        return SplitCertificate("none", witness=sol.witness, residuals={"solve": sol.residual})
    e = pair.middle.dim
    lin = np.linalg.pinv(pair.pi.matrix) if pair.pi.matrix.size else np.zeros((e, pair.quotient.dim))
    sigma_mat = (np.eye(e) - pair.mu.matrix @ rho.matrix) @ lin
    sigma = ModMorphism(pair.quotient, pair.middle, sigma_mat)
    res = _split_residuals(pair, rho.matrix, sigma_mat)
    res["retraction_equivariance"] = rho.equivariance_residual()
    res["section_equivariance"] = sigma.equivariance_residual()
    return SplitCertificate("module-split", section=sigma, retraction=rho, residuals=res)


def split_linear(pair, estimate_cb=False, levels=2):
    """Minimum-norm linear section and the matching linear retraction."""
    e, c = pair.middle.dim, pair.quotient.dim
    pi, mu = pair.pi.matrix, pair.mu.matrix
    sigma = np.linalg.pinv(pi) if pi.size else np.zeros((e, c), complex)
    rho = (np.linalg.pinv(mu) @ (np.eye(e) - sigma @ pi)) if mu.size else np.zeros((pair.sub.dim, e), complex)
    res = _split_residuals(pair, rho, sigma)
    tol = pair.tol.exact_residual * max(1.0, float(np.linalg.norm(sigma)), float(np.linalg.norm(rho)))
    if max(res.values(), default=0.0) > 1e3 * tol:
        return SplitCertificate("none", residuals=res)
    cb = None
    if estimate_cb and c:
        cb = cb_norm_estimate(LinearMap(pair.quotient.space, pair.middle.space, sigma), level_cap=levels, samples=4).value
    return SplitCertificate("linear-split", section=sigma, retraction=rho, residuals=res, cb_estimate=cb)


@dataclass
class PairMembership:
    e_min: bool
    e_rel: bool
    e_max: bool
    diagnostics: dict
    module_split: SplitCertificate | None = None
    linear_split: SplitCertificate | None = None

    def member(self, structure):
        return {"min": self.e_min, "rel": self.e_rel, "max": self.e_max}[normalize_structure(structure)]

    @property
    def flags(self):
        return (self.e_min, self.e_rel, self.e_max)


def classify_pair(pair, sample_universal=True, structures=STRUCTURES):
    check = is_kernel_cokernel_pair(pair.mu, pair.pi, sample_universal=sample_universal)
    if not check.ok:
        return PairMembership(False, False, False, check.diagnostics)
    lin = split_linear(pair) if ("rel" in structures or "min" in structures) else None
    mod = split_module(pair) if "min" in structures else None
    e_rel = bool(lin) if lin is not None else None
    e_min = bool(mod) and bool(e_rel) if mod is not None else None
    return PairMembership(e_min, e_rel, True, check.diagnostics, mod, lin)


def in_structure(pair, structure, sample_universal=False):
    s = normalize_structure(structure)
    wanted = {"max": ("max",), "rel": ("rel",), "min": ("rel", "min")}[s]
    return classify_pair(pair, sample_universal=sample_universal, structures=wanted).member(s)


# -- admissible morphisms -----------------------------------------------------------


@dataclass
class AdmissibleFactorization:
    image: object
    epi: ModMorphism
    mono: ModMorphism
    epi_pair: KernelCokernelPair
    mono_pair: KernelCokernelPair
    residual: float
    coimage_iso: bool


def admissible_factorization(f, structure):
    """Factor ``f = mu_f pi_f`` through its image and test both halves."""
    s = normalize_structure(structure)
    tol = f.src.tol
    img_basis = range_basis(f.matrix, tol) if f.matrix.size else np.zeros((f.dst.dim, 0))
    image, mono = submodule(f.dst, img_basis, check=False)
    epi = ModMorphism(f.src, image, np.linalg.pinv(mono.matrix) @ f.matrix) if image.dim else zero_morphism(f.src, image)
    residual = float(np.linalg.norm(mono.matrix @ epi.matrix - f.matrix)) if f.matrix.size else 0.0
    epi_pair = pair_from_epi(epi)
    mono_pair = pair_from_mono(mono)
    diag = {}
    ok_epi = in_structure(epi_pair, s)
    ok_mono = in_structure(mono_pair, s)
    # the coimage src/ker f maps isomorphically onto the image
    coimage, proj = cokernel(epi_pair.mu)
    induced, _ = factor_through_epi(proj, epi)
    iso = rank(induced.matrix, tol) == image.dim == coimage.dim if image.dim else coimage.dim == 0
    if not (ok_epi and ok_mono):
        diag.update(epi_admissible=ok_epi, mono_admissible=ok_mono)
        raise NotAdmissibleError(f"image factorization is not admissible in E_{s}", diag)
    return AdmissibleFactorization(image, epi, mono, epi_pair, mono_pair, residual, iso)


# -- axiom suite -------------------------------------------------------------------

AXIOMS = ("E0", "E0op", "E1", "E1op", "E2", "E2op", "iso")


@dataclass
class AxiomTally:
    name: str
    passed: int = 0
    failed: int = 0
    max_residual: float = 0.0
    failing_seeds: list = field(default_factory=list)

    @property
    def total(self):
        return self.passed + self.failed


@dataclass
class AxiomSuiteReport:
    algebra: str
    structure: str
    samples: int
    seed: int
    tallies: dict
    wall_time: float

    @property
    def passed(self):
        return all(t.failed == 0 for t in self.tallies.values())

    @property
    def max_residual(self):
        return max((t.max_residual for t in self.tallies.values()), default=0.0)


def axiom_suite(algebra, structure, samples=200, seed=0, max_dim=8, axioms=AXIOMS):
    """Random instances of each exact-structure axiom.

    Instance ``i`` of axiom ``a`` draws from ``default_rng([seed, a, i])`` so
    any failure replays from the recorded triple.
    """
    from . import sampling

    s = normalize_structure(structure)
    start = time.perf_counter()
    tallies = {}
    for a_index, name in enumerate(AXIOMS):
        if name not in axioms:
            continue
        tally = AxiomTally(name)
        check = getattr(sampling, f"axiom_{name.lower()}")
        for i in range(samples):
            rng = np.random.default_rng([seed, a_index, i])
            ok, residual = check(algebra, s, rng, max_dim)
            tally.max_residual = max(tally.max_residual, residual)
            if ok and residual < 1e-8:
                tally.passed += 1
            else:
                tally.failed += 1
                tally.failing_seeds.append((seed, a_index, i))
        tallies[name] = tally
    return AxiomSuiteReport(algebra.name or repr(algebra), s, samples, seed, tallies, time.perf_counter() - start)
