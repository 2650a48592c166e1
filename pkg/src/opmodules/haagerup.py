"""The module E (x) A with Haagerup bounds and the canonical projection onto E.

An element ``u`` of M_n(E (x) A) has coordinates ``u[i, j, e*dA + a]``.  A
factorization ``u = alpha . beta`` with ``alpha`` in M_{n,r}(E) and ``beta``
in M_{r,n}(A) gives the upper bound ``|alpha| |beta|``; scalar functionals
``phi`` on E and ``psi`` on A give the lower bound
``|[(phi (x) psi)(u_ij)]|``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SearchFailedError
from .modules import ModMorphism, OpModule
from .numerics import (
    hermitian_basis,
    min_sum_opnorm,
    null_space,
    operator_norm,
    resolve_tol,
    solve_lmi,
    top_singular_pair,
)
from .opspace import Concrete, HaagerupTensor, LinearMap, NotCompilable, Subspace


class TensorModule(OpModule):
    """``E (x) A`` with ``(x (x) a) . b = x (x) ab``."""

    @property
    def left(self):
        return self.space.left


def tensor_module(space, algebra):
    """Right A-module ``E (x) A`` over an operator space (or a module's space)."""
    space = getattr(space, "space", space)
    hspace = HaagerupTensor(space, algebra)
    action = np.array([np.kron(np.eye(space.dim), algebra.right_mult[j]) for j in range(algebra.dim)])
    return TensorModule(hspace, algebra, action, name="E(x)A")


@dataclass
class HaagerupBounds:
    level: int
    lower: float
    upper: float
    factorization: tuple
    functional_pair: tuple | None
    certified: bool = True
    restarts: int = 0
    history: list = field(default_factory=list)

    @property
    def gap(self):
        return self.upper - self.lower


def _split(u, de, da):
    n, m, _ = u.shape
    return u.reshape(n, m, de, da)


def _product(alpha, beta):
    """Coordinates of ``alpha . beta``."""
    n = alpha.shape[0]
    m = beta.shape[1]
    out = np.einsum("ike,kja->ijea", alpha, beta)
    return out.reshape(n, m, -1)


def svd_factorization(space, u):
    """Balanced rank factorization of ``u`` from an SVD of its reshaped coefficients."""
    de, da = space.left.dim, space.algebra.dim
    n, m, _ = u.shape
    coeff = np.transpose(_split(u, de, da), (0, 2, 1, 3)).reshape(n * de, m * da)
    x, s, yh = np.linalg.svd(coeff, full_matrices=False)
    keep = max(1, int(np.count_nonzero(s > space.tol.rank_tol * max(1.0, s[0] if len(s) else 0.0))))
    root = np.sqrt(s[:keep])
    alpha = (x[:, :keep] * root).reshape(n, de, keep).transpose(0, 2, 1)
    beta = (root[:, None] * yh[:keep]).reshape(keep, m, da)
    return alpha, beta


def _factor_norm(space, x):
    return space.matrix_norm(x)


def _min_factor(space, fixed, other_is_beta, u, start, tol):
    """Minimise the norm of one factor with the other held fixed."""
    target = space.left if other_is_beta else space.algebra.space
    try:
        form = target.compile(start.shape[0], start.shape[1])
    except NotCompilable:
        return start, _factor_norm(target, start).value
    # u[i,j,e,a] = sum_k alpha[i,k,e] beta[k,j,a] is linear in the free factor
    if other_is_beta:
        n, de = start.shape[0], start.shape[2]
        lin = np.einsum("il,ef,kja->ijealkf", np.eye(n), np.eye(de), fixed)
    else:
        m, da = start.shape[1], start.shape[2]
        lin = np.einsum("ike,jl,ab->ijeaklb", fixed, np.eye(m), np.eye(da))
    lin = lin.reshape(u.size, start.size)
    null = null_space(lin, tol)
    if null.shape[1] == 0:
        return start, _factor_norm(target, start).value
    pts = form.points(start.reshape(-1))
    dirs = []
    for b in form.blocks:
        bx = b[:, :, : form.nx]
        moved = np.tensordot(bx, null, axes=(2, 0))
        dirs.append(np.concatenate([np.moveaxis(moved, 2, 0), np.moveaxis(b[:, :, form.nx:], 2, 0)], axis=0))
    res = min_sum_opnorm(pts, dirs, tol)
    shift = null @ res.coefficients[: null.shape[1]]
    best = start + shift.reshape(start.shape)
    value = _factor_norm(target, best).value
    base = _factor_norm(target, start).value
    if value >= base:
        return start, base
    return best, value


def _upper_search(space, u, iterations, restarts, rng, tol):
    alpha, beta = svd_factorization(space, u)
    na = space.left.matrix_norm(alpha).value
    nb = space.algebra.space.matrix_norm(beta).value
    best = (na * nb, alpha, beta)
    history = [best[0]]
    starts = [(alpha, beta)]
    r = alpha.shape[1]
    for _ in range(restarts):
        s = np.eye(r) + 0.5 * (rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r))) / np.sqrt(r)
        if np.linalg.cond(s) > 1e6:
            continue
        starts.append((np.einsum("ike,kl->ile", alpha, s), np.einsum("lk,kja->lja", np.linalg.inv(s), beta)))
    for a0, b0 in starts:
        a, b = a0, b0
        for _ in range(iterations):
            a, _ = _min_factor(space, b, True, u, a, tol)
            b, _ = _min_factor(space, a, False, u, b, tol)
            val = space.left.matrix_norm(a).value * space.algebra.space.matrix_norm(b).value
            history.append(val)
            if val < best[0]:
                best = (val, a, b)
        if iterations == 0:
            val = space.left.matrix_norm(a).value * space.algebra.space.matrix_norm(b).value
            if val < best[0]:
                best = (val, a, b)
    return best, history


def concrete_basis(space):
    """Basis matrices realizing ``space`` concretely, or ``None``."""
    if isinstance(space, Concrete):
        return space.basis
    if isinstance(space, Subspace):
        parent = concrete_basis(space.parent)
        if parent is not None:
            return np.tensordot(space.inclusion.T, parent, axes=(1, 0))
    return None


def _sdp_factorization(space, u, tol):
    """Optimal factorization for concretely realized E.

    ``|u|_h^2`` is the least ``t`` with ``[[G, U], [U^H, H]] >= 0``,
    ``Phi(G) <= t`` and ``Psi(H) <= t``, where ``Phi(X X^H) = alpha alpha^*``
    and ``Psi`` likewise gives ``beta^* beta``.  The factor pair is rebuilt
    from ``G + eps`` so that ``alpha . beta = u`` holds exactly.
    """
    ebasis = concrete_basis(space.left)
    if ebasis is None:
        return None
    abasis = space.algebra.basis
    de, da = space.left.dim, space.algebra.dim
    n, m, _ = u.shape
    coeff = np.transpose(_split(u, de, da), (0, 2, 1, 3)).reshape(n * de, m * da)
    n1, n2 = n * de, m * da
    p, nn = ebasis.shape[1], abasis.shape[1]
    bb = np.einsum("eac,fbc->efab", ebasis, ebasis.conj())
    aa = np.einsum("acx,bcy->abxy", abasis.conj(), abasis)
    hb1, hb2 = hermitian_basis(n1), hermitian_basis(n2)
    # Phi(G) = sum G[(ie),(jf)] E_ij (x) B_e B_f^*,  Psi(H) = sum H[(ja),(lb)] E_jl (x) A_a^* A_b
    phi_img = np.einsum("siejf,efab->siajb", hb1.reshape(-1, n, de, n, de), bb).reshape(len(hb1), n * p, n * p)
    psi_img = np.einsum("sjalb,abxy->sjxly", hb2.reshape(-1, m, da, m, da), aa).reshape(len(hb2), m * nn, m * nn)
    nv = len(hb1) + len(hb2) + 1
    big = n1 + n2
    f0 = np.zeros((big, big), complex)
    f0[:n1, n1:] = coeff
    f0[n1:, :n1] = coeff.conj().T
    fs = np.zeros((nv, big, big), complex)
    fs[: len(hb1), :n1, :n1] = hb1
    fs[len(hb1):-1, n1:, n1:] = hb2
    f_phi = np.zeros((nv, n * p, n * p), complex)
    f_phi[: len(hb1)] = -phi_img
    f_phi[-1] = np.eye(n * p)
    f_psi = np.zeros((nv, m * nn, m * nn), complex)
    f_psi[len(hb1):-1] = -psi_img
    f_psi[-1] = np.eye(m * nn)
    cost = np.zeros(nv)
    cost[-1] = 1.0
    sol = solve_lmi(cost, [(f0, fs), (np.zeros((n * p, n * p)), f_phi), (np.zeros((m * nn, m * nn)), f_psi)], tol)
    if not sol.solved:
        return None
    g = np.tensordot(sol.x[: len(hb1)], hb1, axes=(0, 0))
    g = (g + g.conj().T) / 2
    t = max(sol.x[-1], 0.0)
    g = g + max(1e-9 * max(1.0, t), 1e-12) * np.eye(n1)
    x = np.linalg.cholesky(g)
    ymat_t = np.linalg.solve(x, coeff)
    alpha = x.reshape(n, de, n1).transpose(0, 2, 1)
    beta = ymat_t.reshape(n1, m, da)
    lower = _dual_lower(sol.duals[1], sol.duals[2], bb, aa, coeff, n, m)
    return alpha, beta, lower


def _psd_sqrt(h):
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def _dual_lower(p_state, q_state, bb, aa, coeff, n, m):
    """Lower bound ``|Phi^*(P)^(1/2) U Psi^*(Q)^(1/2)|_1 / sqrt(tr P tr Q)``.

    Valid for any positive ``P`` and ``Q``; the solver's dual states make it
    tight.
    """
    p_state = _psd_sqrt(p_state) @ _psd_sqrt(p_state)
    q_state = _psd_sqrt(q_state) @ _psd_sqrt(q_state)
    tp, tq = np.trace(p_state).real, np.trace(q_state).real
    if tp <= 0 or tq <= 0:
        return 0.0
    de, pe = bb.shape[0], bb.shape[2]
    da, pa = aa.shape[0], aa.shape[2]
    p4 = p_state.reshape(n, pe, n, pe)
    q4 = q_state.reshape(m, pa, m, pa)
    # <P, Phi(G)> = <Phi^*(P), G>
    z11 = np.einsum("jbia,efab->iejf", p4, bb).reshape(n * de, n * de)
    z22 = np.einsum("lyjx,abxy->jalb", q4, aa).reshape(m * da, m * da)
    core = _psd_sqrt(z11.conj()) @ coeff @ _psd_sqrt(z22.conj())
    return float(np.linalg.svd(core, compute_uv=False).sum() / np.sqrt(tp * tq))


def _functional(space, y):
    """Norming coordinate functional of ``y`` in ``space`` (level one)."""
    if not np.any(y):
        return np.zeros(space.dim, complex), 0.0
    c, value = space.norming_functional(y.reshape(1, 1, -1))
    return c.reshape(-1), value


def _lower_search(space, u, restarts, rng, iterations=12):
    """Alternating maximisation of ``|[(phi (x) psi)(u_ij)]|``."""
    de, da = space.left.dim, space.algebra.dim
    n, m, _ = u.shape
    uu = _split(u, de, da)
    aspace = space.algebra.space
    best = (0.0, None)
    try:
        space.left.compile(1)
    except NotCompilable:
        return best
    for trial in range(restarts + 1):
        if trial == 0:
            alpha, beta = svd_factorization(space, u)
            psi, _ = _functional(aspace, beta[0].sum(axis=0) if beta.shape[0] else aspace.random_element(rng).reshape(-1))
        else:
            psi, _ = _functional(aspace, aspace.random_element(rng).reshape(-1))
        value = 0.0
        phi = None
        for _ in range(iterations):
            me = np.einsum("ijea,a->ije", uu, psi)
            # best phi for the fixed psi: norming functional of (xi^H M_e eta)_e
            if phi is None:
                phi, _ = _functional(space.left, me.reshape(n * m, de).sum(axis=0) + 1e-3 * rng.normal(size=de))
            mat = np.einsum("ije,e->ij", me, phi)
            _, xi, eta = top_singular_pair(mat)
            y = np.einsum("i,ije,j->e", xi.conj(), me, eta)
            phi, _ = _functional(space.left, y)
            ma = np.einsum("ijea,e->ija", uu, phi)
            mat = np.einsum("ija,a->ij", ma, psi)
            _, xi, eta = top_singular_pair(mat)
            z = np.einsum("i,ija,j->a", xi.conj(), ma, eta)
            psi, _ = _functional(aspace, z)
            final = operator_norm(np.einsum("ijea,e,a->ij", uu, phi, psi))
            if final <= value * (1 + 1e-12):
                value = max(value, final)
                break
            value = final
        if value > best[0]:
            best = (value, (phi, psi))
    return best


def haagerup_bounds(space, u, iterations=3, restarts=1, seed=0, tol=None):
    """Certified ``lower <= |u|_h <= upper`` at the level of ``u``."""
    tol = resolve_tol(tol or space.tol)
    u = np.asarray(u, dtype=complex)
    if u.ndim == 1:
        u = u.reshape(1, 1, -1)
    n = u.shape[0]
    if not np.any(u):
        return HaagerupBounds(n, 0.0, 0.0, (np.zeros((n, 0, space.left.dim)), np.zeros((0, n, space.algebra.dim))), None)
    rng = np.random.default_rng(seed)
    lower, pair = _lower_search(space, u, restarts, rng)
    alpha, beta = svd_factorization(space, u)
    upper0 = space.left.matrix_norm(alpha).value * space.algebra.space.matrix_norm(beta).value
    best = (upper0, alpha, beta)
    history = [upper0]
    if upper0 - lower > tol.optimization_gap * max(1.0, upper0) and iterations > 0:
        factors = _sdp_factorization(space, u, tol)
        if factors is not None:
            val = space.left.matrix_norm(factors[0]).value * space.algebra.space.matrix_norm(factors[1]).value
            history.append(val)
            if factors[2] > lower:
                lower, pair = factors[2], None
            if val < best[0]:
                best = (val, factors[0], factors[1])
        else:
            best, history = _upper_search(space, u, iterations, restarts, rng, tol)
    upper = best[0]
    lower = min(lower, upper)
    certified = space.left.exact_norms or space.left.compilable
    return HaagerupBounds(n, lower, upper, (best[1], best[2]), pair, certified, restarts, history)


def haagerup_norm_bounds(tensor, u, n=None, **kwargs):
    space = getattr(tensor, "space", tensor)
    u = np.asarray(u, dtype=complex)
    if u.ndim == 1:
        u = u.reshape(1, 1, -1)
    return haagerup_bounds(space, u, **kwargs)


def elementary_tensor(x, a):
    return np.kron(np.asarray(x, dtype=complex), np.asarray(a, dtype=complex))


# -- the canonical projection -----------------------------------------------------


@dataclass
class CanonicalProjection:
    tensor: TensorModule
    projection: ModMorphism
    section: LinearMap
    residual: float


def projection_matrix(module):
    """Coordinates of ``P(x (x) a) = x . a``."""
    da = module.algebra.dim
    mat = np.zeros((module.dim, module.dim * da), complex)
    for j in range(da):
        mat[:, j::da] = module.action[j]
    return mat


def canonical_projection(module):
    """``P: E (x) A -> E`` and its linear section ``x -> x (x) 1``."""
    tensor = tensor_module(module.space, module.algebra)
    p = ModMorphism(tensor, module, projection_matrix(module))
    unit = module.algebra.unit_coords.reshape(-1, 1)
    sec = np.kron(np.eye(module.dim), unit)
    section = LinearMap(module.space, tensor.space, sec)
    residual = float(np.linalg.norm(p.matrix @ sec - np.eye(module.dim))) if module.dim else 0.0
    return CanonicalProjection(tensor, p, section, residual)


@dataclass
class ContractivityReport:
    samples: int
    levels: int
    violations: int
    worst_ratio: float
    mean_margin: float
    details: list = field(default_factory=list)

    @property
    def passed(self):
        return self.violations == 0


def action_contractivity_check(module, samples=50, levels=2, seed=0, iterations=0):
    """Sample ``|m_n(u)|_n <= |u|_h`` with ``m`` the action map.

    Half the samples are products ``alpha . beta`` of random factors (the
    factorization itself is the upper bound), the rest generic elements
    bounded by the Haagerup upper search.
    """
    rng = np.random.default_rng(seed)
    tensor = tensor_module(module.space, module.algebra)
    pmat = projection_matrix(module)
    gap = module.tol.optimization_gap
    violations, worst, margins, details = 0, 0.0, [], []
    for s in range(samples):
        n = 1 + s % levels
        if s % 2 == 0:
            r = int(rng.integers(1, 3))
            alpha = module.space.random_element(rng, n, r)
            beta = module.algebra.space.random_element(rng, r, n)
            u = _product(alpha, beta)
            bound = module.space.matrix_norm(alpha).upper * module.algebra.space.matrix_norm(beta).upper
        else:
            u = tensor.space.random_element(rng, n)
            bound = haagerup_bounds(tensor.space, u, iterations=iterations, restarts=0).upper
        image = u @ pmat.T
        val = module.space.matrix_norm(image).lower
        ratio = val / bound if bound > 0 else 0.0
        worst = max(worst, ratio)
        margins.append(1 - ratio)
        if val > bound * (1 + gap) + gap:
            violations += 1
            details.append({"sample": s, "level": n, "image_norm": val, "bound": bound})
    return ContractivityReport(samples, levels, violations, worst, float(np.mean(margins)) if margins else 0.0, details)


def separate_by_functionals(tensor, u, restarts=8, seed=0):
    """Unit functionals ``(phi, psi)`` with ``|(phi (x) psi)(u)| > exact_residual``; ``None`` for ``u = 0``."""
    space = getattr(tensor, "space", tensor)
    u = np.asarray(u, dtype=complex).reshape(1, 1, -1)
    tol = space.tol
    if np.linalg.norm(u) <= tol.exact_residual:
        return None
    rng = np.random.default_rng(seed)
    value, pair = _lower_search(space, u, restarts, rng)
    if pair is None or value <= tol.exact_residual:
        raise SearchFailedError("no separating functional pair found", log=[value])
    return pair[0], pair[1], value
