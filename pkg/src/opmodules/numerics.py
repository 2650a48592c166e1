"""Dense complex linear algebra and the conic kernels behind every norm.

Two kinds of computation live here.  Exact ones (operator norms, affine
solves, null spaces) are thin wrappers over LAPACK with one shared notion of
numerical rank.  The optimization ones minimise a sum of operator norms over
an affine family of matrices; they are solved as semidefinite programs with
Clarabel and certified by a dual lower bound built from the solver's dual
variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import clarabel
import numpy as np
import scipy.linalg as sla
from scipy import sparse

from .errors import DimensionError, InputError


@dataclass(frozen=True)
class TolerancePolicy:
    """Tolerances threaded through every comparison in the package.

    ``exact_residual`` bounds residuals of identities that hold exactly in
    exact arithmetic.  ``optimization_gap`` bounds the gap between certified
    upper and lower values of convex programs.  ``rank_tol`` is the relative
    singular value cutoff that defines numerical rank.
    """

    exact_residual: float = 1e-9
    optimization_gap: float = 1e-6
    iteration_cap: int = 200
    rank_tol: float = 1e-10

    def __post_init__(self):
        if not 0 < self.exact_residual < self.optimization_gap < 1:
            raise InputError(
                "tolerances must satisfy 0 < exact_residual < optimization_gap < 1"
            )
        if self.iteration_cap < 1:
            raise InputError("iteration_cap must be positive")
        if not 0 < self.rank_tol <= self.exact_residual:
            raise InputError("rank_tol must lie in (0, exact_residual]")

    def with_overrides(self, **changes):
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


DEFAULT_TOLERANCE = TolerancePolicy()


def resolve_tol(tol):
    return DEFAULT_TOLERANCE if tol is None else tol


def as_complex(m, name="matrix"):
    arr = np.asarray(m, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has non-finite entries")
    return arr


def operator_norm(m):
    """Largest singular value of a complex matrix."""
    arr = as_complex(m)
    if arr.ndim != 2:
        raise InputError(f"expected a 2-d matrix, got shape {arr.shape}")
    if arr.size == 0:
        return 0.0
    return float(np.linalg.norm(arr, 2))


def nuclear_norm(m):
    arr = np.asarray(m, dtype=complex)
    if arr.size == 0:
        return 0.0
    return float(np.linalg.svd(arr, compute_uv=False).sum())


def top_singular_pair(m):
    """Return ``(sigma, u, v)`` with ``u^H m v = sigma`` for the top singular pair."""
    arr = np.asarray(m, dtype=complex)
    if arr.size == 0:
        return 0.0, np.zeros(arr.shape[0], complex), np.zeros(arr.shape[1], complex)
    u, s, vh = np.linalg.svd(arr)
    return float(s[0]), u[:, 0], vh[0].conj()


def numerical_rank(s, tol=None):
    tol = resolve_tol(tol)
    if len(s) == 0:
        return 0
    cutoff = tol.rank_tol * max(1.0, float(s[0]))
    return int(np.count_nonzero(s > cutoff))


def null_space(m, tol=None):
    """Orthonormal basis (columns) of the numerical null space."""
    arr = np.asarray(m, dtype=complex)
    rows, cols = arr.shape
    if cols == 0:
        return np.zeros((0, 0), complex)
    if rows == 0:
        return np.eye(cols, dtype=complex)
    if rows > cols:
        # only the row space matters; compress tall systems first
        arr = sla.qr(arr, mode="r")[0][:cols]
    _, s, vh = sla.svd(arr, full_matrices=True)
    r = numerical_rank(s, tol)
    return vh[r:].conj().T


def range_basis(m, tol=None):
    """Orthonormal basis (columns) of the numerical column space."""
    arr = np.asarray(m, dtype=complex)
    rows, cols = arr.shape
    if rows == 0 or cols == 0:
        return np.zeros((rows, 0), complex)
    u, s, _ = sla.svd(arr, full_matrices=False)
    return u[:, : numerical_rank(s, tol)]


def complement_basis(basis, dim, tol=None):
    """Orthonormal basis of the orthogonal complement of ``span(basis)`` in C^dim."""
    basis = np.asarray(basis, dtype=complex)
    if basis.size == 0:
        return np.eye(dim, dtype=complex)
    basis = basis.reshape(dim, -1)
    return null_space(basis.conj().T, tol)


def rank(m, tol=None):
    arr = np.asarray(m, dtype=complex)
    if arr.size == 0:
        return 0
    return numerical_rank(np.linalg.svd(arr, compute_uv=False), tol)


@dataclass(frozen=True)
class AffineSolution:
    """Outcome of :func:`solve_affine`: exactly one of solution or witness is set."""

    solution: np.ndarray | None
    witness: np.ndarray | None
    residual: float
    rank: int

    @property
    def feasible(self):
        return self.solution is not None

    def __bool__(self):
        return self.feasible


def solve_affine(matrix, rhs, tol=None):
    """Solve ``matrix @ x = rhs`` for the minimum-norm ``x``.

    When no solution exists within ``exact_residual`` (relative to
    ``max(1, |rhs|)``), return instead a unit left-null witness ``y``: it is
    orthogonal to the numerical range of ``matrix`` and has a positive
    pairing with ``rhs``.
    """
    tol = resolve_tol(tol)
    a = as_complex(matrix, "map")
    b = as_complex(rhs, "rhs").reshape(-1)
    if a.ndim != 2 or a.shape[0] != b.shape[0]:
        raise DimensionError(f"map of shape {a.shape} cannot produce rhs of length {b.shape[0]}")
    rows, cols = a.shape
    bnorm = float(np.linalg.norm(b))
    scale = tol.exact_residual * max(1.0, bnorm)
    if rows == 0:
        return AffineSolution(np.zeros(cols, complex), None, 0.0, 0)
    if cols == 0:
        if bnorm <= scale:
            return AffineSolution(np.zeros(0, complex), None, bnorm, 0)
        return AffineSolution(None, b / bnorm, bnorm, 0)
    u, s, vh = sla.svd(a, full_matrices=False)
    r = numerical_rank(s, tol)
    ur = u[:, :r]
    coeff = ur.conj().T @ b
    x = vh[:r].conj().T @ (coeff / s[:r])
    residual = float(np.linalg.norm(a @ x - b))
    if residual <= scale:
        return AffineSolution(x, None, residual, r)
    perp = b - ur @ coeff
    return AffineSolution(None, perp / np.linalg.norm(perp), residual, r)


# -- conic kernel ----------------------------------------------------------


@dataclass(frozen=True)
class CosetMinimum:
    """Certified minimisation of ``sum_b |P_b + sum_i t_i D_{b,i}|``.

    ``value`` is attained by ``coefficients``; ``lower`` is a dual bound.
    ``functional`` holds matrices ``W_b`` with ``max_b |W_b|_1 <= 1`` that
    annihilate every direction and satisfy ``Re sum_b <W_b, P_b> = lower``.
    """

    value: float
    lower: float
    coefficients: np.ndarray
    certified: bool
    functional: list = field(default_factory=list)
    status: str = "exact"

    @property
    def gap(self):
        return self.value - self.lower


def _realify(x):
    # works on stacks (..., r, c)
    top = np.concatenate([x.real, -x.imag], axis=-1)
    bottom = np.concatenate([x.imag, x.real], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def _svec_index(n, i, j):
    # Clarabel's PSD triangle: upper triangle, column-major
    i, j = np.minimum(i, j), np.maximum(i, j)
    return j * (j + 1) // 2 + i


def _block_norms(mats):
    return [operator_norm(m) for m in mats]


def _run_clarabel(q, amat, bvec, cones, tol):
    """Solve with tight tolerances, retrying looser once; ``None`` if the solver panics twice."""
    nvar = q.shape[0]
    for gap in (1e-10, 1e-8):
        settings = clarabel.DefaultSettings()
        settings.verbose = False
        settings.max_iter = tol.iteration_cap
        settings.tol_gap_abs = gap
        settings.tol_gap_rel = gap
        settings.tol_feas = gap
        try:
            return clarabel.DefaultSolver(sparse.csc_matrix((nvar, nvar)), q, amat, bvec, cones, settings).solve()
        except BaseException as exc:
            # Rust panics surface as pyo3's PanicException, a BaseException
            if type(exc).__name__ != "PanicException":
                raise
    return None


def min_sum_opnorm(points, directions, tol=None):
    """Minimise ``sum_b |points[b] + sum_i t_i directions[b][i]|`` over complex ``t``.

    ``points`` is a list of matrices; ``directions[b]`` is an array of shape
    ``(k, rows_b, cols_b)`` sharing the same ``k`` across blocks.
    """
    tol = resolve_tol(tol)
    pts = [as_complex(p, "point") for p in points]
    dirs = [as_complex(d, "directions") for d in directions]
    if len(pts) != len(dirs):
        raise DimensionError("one direction stack per block is required")
    k = dirs[0].shape[0] if dirs else 0
    for p, d in zip(pts, dirs):
        if d.ndim != 3 or d.shape[0] != k or d.shape[1:] != p.shape:
            raise DimensionError(f"direction stack {d.shape} does not match point {p.shape}")
    keep = [b for b, p in enumerate(pts) if p.size]
    start = float(sum(_block_norms(pts)))
    zero_t = np.zeros(k, complex)
    if k == 0 or not keep:
        return CosetMinimum(start, start, zero_t, True, _trivial_functional(pts), "exact")

    stacked = np.concatenate([dirs[b].reshape(k, -1) for b in keep], axis=1).T
    u, s, vh = np.linalg.svd(stacked, full_matrices=False)
    r = numerical_rank(s, tol)
    if r == 0:
        return CosetMinimum(start, start, zero_t, True, _trivial_functional(pts), "exact")
    basis = u[:, :r]
    to_t = vh[:r].conj().T / s[:r]

    scale = start if start > 0 else 1.0
    if start == 0:
        return CosetMinimum(0.0, 0.0, zero_t, True, [np.zeros_like(p) for p in pts], "exact")

    # split the orthonormal basis back into blocks
    offsets = np.cumsum([0] + [pts[b].size for b in keep])
    bdirs = {}
    for n_b, b in enumerate(keep):
        bdirs[b] = basis[offsets[n_b]:offsets[n_b + 1]].T.reshape((r,) + pts[b].shape)

    nvar = 2 * r + len(keep)
    a_rows, b_rows, cones, layout = [], [], [], []
    for n_b, b in enumerate(keep):
        rows, cols = pts[b].shape
        n = 2 * (rows + cols)
        size = n * (n + 1) // 2
        ii, jj = np.meshgrid(np.arange(2 * rows), 2 * rows + np.arange(2 * cols), indexing="ij")
        pos = _svec_index(n, ii, jj).ravel()
        amat = np.zeros((size, nvar))
        real_d = _realify(bdirs[b]).reshape(r, -1)
        real_id = _realify(1j * bdirs[b]).reshape(r, -1)
        amat[pos, :r] = -np.sqrt(2) * real_d.T
        amat[pos, r:2 * r] = -np.sqrt(2) * real_id.T
        diag = _svec_index(n, np.arange(n), np.arange(n))
        amat[diag, 2 * r + n_b] = -1.0
        bvec = np.zeros(size)
        bvec[pos] = np.sqrt(2) * _realify(pts[b] / scale).ravel()
        a_rows.append(amat)
        b_rows.append(bvec)
        cones.append(clarabel.PSDTriangleConeT(n))
        layout.append((b, n, size, rows, cols))
    amat = sparse.csc_matrix(np.vstack(a_rows))
    bvec = np.concatenate(b_rows)
    q = np.zeros(nvar)
    q[2 * r:] = 1.0
    solution = _run_clarabel(q, amat, bvec, cones, tol)
    if solution is None:
        lower, functional = _dual_bound(pts, _trivial_functional(pts), keep, basis, offsets)
        return CosetMinimum(start, min(lower, start), zero_t, False, functional, "SolverPanic")
    status = str(solution.status)
    x = np.asarray(solution.x)
    z = np.asarray(solution.z)

    coeff_basis = (x[:r] + 1j * x[r:2 * r]) * scale
    if not np.all(np.isfinite(coeff_basis)):
        coeff_basis = np.zeros(r, complex)
    t = to_t @ coeff_basis
    value = float(sum(_block_norms(_shift(pts, dirs, t))))
    if value > start:
        t, value = zero_t, start

    # dual matrices from the off-diagonal blocks of the PSD multipliers
    ws = [np.zeros_like(p) for p in pts]
    offset = 0
    for b, n, size, rows, cols in layout:
        zb = z[offset:offset + size]
        offset += size
        ii, jj = np.meshgrid(np.arange(2 * rows), 2 * rows + np.arange(2 * cols), indexing="ij")
        g = -zb[_svec_index(n, ii, jj)]
        ws[b] = (g[:rows, :cols] + g[rows:, cols:]) + 1j * (g[rows:, :cols] - g[:rows, cols:])
    lower, functional = _dual_bound(pts, ws, keep, basis, offsets)
    lower = min(lower, value)
    certified = (
        status in ("Solved", "AlmostSolved")
        and value - lower <= tol.optimization_gap * max(1.0, value)
    )
    return CosetMinimum(value, lower, t, certified, functional, status)


def _shift(pts, dirs, t):
    return [p + np.tensordot(t, d, axes=(0, 0)) for p, d in zip(pts, dirs)]


def _trivial_functional(pts):
    ws = []
    for p in pts:
        if p.size == 0:
            ws.append(np.zeros_like(p))
            continue
        sigma, u, v = top_singular_pair(p)
        ws.append(np.outer(u, v.conj()) if sigma > 0 else np.zeros_like(p))
    return ws


def _dual_bound(pts, ws, keep, basis, offsets):
    vec = np.concatenate([ws[b].ravel() for b in keep])
    vec = vec - basis @ (basis.conj().T @ vec)
    projected = [np.zeros_like(p) for p in pts]
    for n_b, b in enumerate(keep):
        projected[b] = vec[offsets[n_b]:offsets[n_b + 1]].reshape(pts[b].shape)
    bound = max(nuclear_norm(w) for w in projected)
    if bound <= 0:
        return 0.0, [np.zeros_like(p) for p in pts]
    projected = [w / bound for w in projected]
    lower = float(sum(np.vdot(w, p).real for w, p in zip(projected, pts)))
    if lower <= 0:
        return 0.0, [np.zeros_like(p) for p in pts]
    return lower, projected


def min_opnorm_over_coset(point, directions, tol=None):
    """Minimise ``|point + sum_i t_i directions[i]|`` over complex ``t``."""
    p = as_complex(point, "point")
    if p.ndim != 2:
        raise InputError("point must be a matrix")
    d = [as_complex(x, "direction") for x in directions]
    for x in d:
        if x.shape != p.shape:
            raise DimensionError(f"direction of shape {x.shape} does not match point {p.shape}")
    stack = np.array(d, dtype=complex).reshape((len(d),) + p.shape)
    return min_sum_opnorm([p], [stack], tol)


def hermitian_basis(n):
    """Real basis of n x n Hermitian matrices, shape ``(n*n, n, n)``."""
    out = []
    for i in range(n):
        e = np.zeros((n, n), complex)
        e[i, i] = 1
        out.append(e)
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n), complex)
            e[i, j] = e[j, i] = 1 / np.sqrt(2)
            out.append(e)
            f = np.zeros((n, n), complex)
            f[i, j], f[j, i] = 1j / np.sqrt(2), -1j / np.sqrt(2)
            out.append(f)
    return np.array(out).reshape(n * n, n, n)


@dataclass
class LMISolution:
    x: np.ndarray
    value: float
    status: str
    duals: list = None

    @property
    def solved(self):
        return self.status in ("Solved", "AlmostSolved")


def solve_lmi(cost, constraints, tol=None):
    """Minimise ``cost . x`` subject to ``F0 + sum_i x_i F_i >= 0`` (complex Hermitian).

    ``constraints`` is a list of ``(F0, F)`` with ``F`` of shape ``(nvar, k, k)``.
    """
    tol = resolve_tol(tol)
    cost = np.asarray(cost, dtype=float)
    nvar = cost.shape[0]
    a_rows, b_rows, cones, sizes = [], [], [], []
    for f0, fs in constraints:
        f0 = np.asarray(f0, dtype=complex)
        fs = np.asarray(fs, dtype=complex).reshape(nvar, f0.shape[0], f0.shape[0])
        k = 2 * f0.shape[0]
        ii, jj = np.triu_indices(k)
        # column-major upper triangle order
        order = np.lexsort((ii, jj))
        ii, jj = ii[order], jj[order]
        weight = np.where(ii == jj, 1.0, np.sqrt(2))
        real0 = _realify(f0)
        realf = _realify(fs)
        b_rows.append(weight * real0[ii, jj])
        a_rows.append(-(weight[:, None] * realf[:, ii, jj].T))
        cones.append(clarabel.PSDTriangleConeT(k))
        sizes.append((f0.shape[0], ii, jj, weight))
    amat = sparse.csc_matrix(np.vstack(a_rows))
    bvec = np.concatenate(b_rows)
    sol = _run_clarabel(cost, amat, bvec, cones, tol)
    if sol is None:
        return LMISolution(np.zeros(nvar), 0.0, "SolverPanic", [])
    x = np.asarray(sol.x)
    z = np.asarray(sol.z)
    duals, start = [], 0
    for h, ii, jj, weight in sizes:
        zr = np.zeros((2 * h, 2 * h))
        block = z[start:start + len(ii)] / weight
        start += len(ii)
        zr[ii, jj] = block
        zr[jj, ii] = block
        # compress the realified dual back to a complex Hermitian matrix
        w = zr[:h, :h] + zr[h:, h:] + 1j * (zr[h:, :h] - zr[:h, h:])
        duals.append((w + w.conj().T) / 2)
    return LMISolution(x, float(cost @ x), str(sol.status), duals)


def canonical_basis(basis, tol=None):
    """Basis of ``span(basis)`` independent of the input basis.

    Gram-Schmidt on the columns of the orthogonal projector, in index order.
    """
    tol = resolve_tol(tol)
    basis = np.asarray(basis, dtype=complex)
    if basis.size == 0:
        return basis.reshape(basis.shape[0], 0)
    q = range_basis(basis, tol)
    proj = q @ q.conj().T
    out = []
    for col in proj.T:
        v = col.copy()
        for w in out:
            v = v - w * (w.conj() @ v)
        if np.linalg.norm(v) > 1e3 * tol.exact_residual:
            out.append(v / np.linalg.norm(v))
        if len(out) == q.shape[1]:
            break
    return np.array(out).T
