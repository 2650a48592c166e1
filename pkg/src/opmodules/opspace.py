"""Operator spaces as composable matrix-norm oracles.

Every node knows its dimension and can evaluate the norm of an element of
M_{n,m}(E), stored as an array of shape ``(n, m, dim)``.  Concrete spaces,
subspaces, quotients and direct sums compile to a *norm form*: a list of
matrix-valued linear maps ``L_b`` such that

    |x|_{n,m} = min_z  sum_b |L_b(x, z)|_op

over auxiliary coordinates ``z`` (the kernel of a quotient).  Forms without
auxiliary coordinates give exact norms; the others go through the conic
kernel and come back as certified intervals.  Hom spaces and Haagerup tensor
products are estimated separately.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InputError, UnsupportedError
from .numerics import (
    min_sum_opnorm,
    nuclear_norm,
    operator_norm,
    range_basis,
    complement_basis,
    rank,
    resolve_tol,
    solve_affine,
    top_singular_pair,
)


@dataclass(frozen=True)
class LevelNorm:
    """A matrix norm value with its certification.

    ``exact`` values have ``lower == value == upper``.  Otherwise
    ``[lower, upper]`` is an interval known to contain the true norm when
    ``certified`` is set, and ``value`` is the reported estimate.
    """

    level: int
    value: float
    lower: float
    upper: float
    exact: bool = False
    certified: bool = True
    per_level: tuple = ()
    exact_at_cap: bool = False

    @property
    def certification(self):
        if self.exact:
            return "exact"
        return ("interval", self.lower, self.upper)

    def __float__(self):
        return float(self.value)

    @classmethod
    def exactly(cls, level, value):
        return cls(level, value, value, value, exact=True)


class NotCompilable(UnsupportedError):
    pass


@dataclass
class NormForm:
    blocks: list
    nx: int
    naux: int

    def split(self):
        return [b[:, :, : self.nx] for b in self.blocks], [b[:, :, self.nx:] for b in self.blocks]

    def points(self, xflat):
        return [np.tensordot(b[:, :, : self.nx], xflat, axes=(2, 0)) for b in self.blocks]

    def aux_directions(self):
        return [np.moveaxis(b[:, :, self.nx:], 2, 0) for b in self.blocks]

    def evaluate(self, xflat, level, tol):
        pts = self.points(xflat)
        if self.naux == 0:
            return LevelNorm.exactly(level, float(sum(operator_norm(p) for p in pts)))
        res = min_sum_opnorm(pts, self.aux_directions(), tol)
        return LevelNorm(level, res.value, res.lower, res.value, certified=res.certified)

    def norming(self, xflat, tol):
        """Functional matrices ``W_b`` (max nuclear norm <= 1) annihilating the aux part."""
        pts = self.points(xflat)
        if self.naux == 0:
            ws = []
            for p in pts:
                sigma, u, v = top_singular_pair(p)
                ws.append(np.outer(u, v.conj()) if sigma > 0 else np.zeros_like(p))
            return ws, float(sum(operator_norm(p) for p in pts))
        res = min_sum_opnorm(pts, self.aux_directions(), tol)
        return res.functional, res.lower

    def pullback(self, ws):
        """Coordinates ``c`` with ``sum_b <W_b, L_b(x)> = c . x``."""
        total = np.zeros(self.nx, complex)
        for w, b in zip(ws, self.blocks):
            total += np.tensordot(w.conj(), b[:, :, : self.nx], axes=([0, 1], [0, 1]))
        return total


def _coerce(x, dim):
    arr = np.asarray(x, dtype=complex)
    if arr.ndim == 1:
        arr = arr.reshape(1, 1, -1)
    if arr.ndim != 3 or arr.shape[2] != dim:
        raise DimensionError(f"expected an (n, m, {dim}) array of coordinates, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("element has non-finite entries")
    return arr


class OperatorSpace:
    """Base node; subclasses implement :meth:`_build_form` or override norms."""

    kind = "abstract"

    def __init__(self, dim, tol=None):
        self.dim = int(dim)
        self.tol = resolve_tol(tol)
        self._forms = {}

    def __repr__(self):
        return f"<{type(self).__name__} dim={self.dim}>"

    def compile(self, n, m=None):
        m = n if m is None else m
        key = (n, m)
        if key not in self._forms:
            self._forms[key] = self._build_form(n, m)
        return self._forms[key]

    def _build_form(self, n, m):
        raise NotCompilable(f"{type(self).__name__} has no norm form")

    @property
    def exact_norms(self):
        try:
            return self.compile(1).naux == 0
        except NotCompilable:
            return False

    @property
    def compilable(self):
        try:
            self.compile(1)
        except NotCompilable:
            return False
        return True

    def matrix_norm(self, x):
        x = _coerce(x, self.dim)
        n, m, _ = x.shape
        if self.dim == 0 or not np.any(x):
            return LevelNorm.exactly(n, 0.0)
        form = self.compile(n, m)
        return form.evaluate(x.reshape(-1), n, self.tol)

    def norm(self, x):
        return self.matrix_norm(np.asarray(x).reshape(1, 1, self.dim)).value

    def norming_functional(self, x):
        """Return ``(c, value)``: ``|c . y| <= |y|`` for all ``y`` of x's shape, ``c . x = value``."""
        x = _coerce(x, self.dim)
        n, m, _ = x.shape
        form = self.compile(n, m)
        ws, value = form.norming(x.reshape(-1), self.tol)
        return form.pullback(ws).reshape(x.shape), value

    def functional_norm_upper(self, c):
        """Certified upper bound for the norm of ``y -> c . y`` at level one."""
        c = np.asarray(c, dtype=complex).reshape(self.dim)
        if not np.any(c):
            return 0.0
        try:
            form = self.compile(1)
        except NotCompilable:
            return float("inf")
        # unknowns: conj(W_b) entries; equations: pairing with x part is c, with aux part is 0
        cols, shapes = [], []
        for b in form.blocks:
            shapes.append(b.shape[:2])
            cols.append(b.reshape(-1, b.shape[2]).T)
        system = np.hstack(cols)
        rhs = np.concatenate([c, np.zeros(form.naux, complex)])
        sol = solve_affine(system, rhs, self.tol)
        if not sol.feasible:
            return float("inf")
        bound, offset = 0.0, 0
        for shape in shapes:
            size = shape[0] * shape[1]
            bound = max(bound, nuclear_norm(sol.solution[offset:offset + size].reshape(shape)))
            offset += size
        return bound * (1 + 1e-12)

    def random_element(self, rng, n=1, m=None):
        m = n if m is None else m
        return rng.normal(size=(n, m, self.dim)) + 1j * rng.normal(size=(n, m, self.dim))


class Concrete(OperatorSpace):
    """Span of linearly independent ``p x q`` matrices; norms are operator norms."""

    kind = "concrete"

    def __init__(self, basis, tol=None):
        basis = np.asarray(basis, dtype=complex)
        if basis.ndim != 3:
            raise DimensionError(f"basis must have shape (d, p, q), got {basis.shape}")
        super().__init__(basis.shape[0], tol)
        self.basis = basis
        self.shape = basis.shape[1:]
        if self.dim and rank(basis.reshape(self.dim, -1).T, self.tol) < self.dim:
            raise InputError("concrete embedding is not injective")

    def assemble(self, x):
        x = _coerce(x, self.dim)
        n, m, _ = x.shape
        p, q = self.shape
        return np.einsum("ijc,cab->iajb", x, self.basis).reshape(n * p, m * q)

    def matrix_norm(self, x):
        x = _coerce(x, self.dim)
        if self.dim == 0:
            return LevelNorm.exactly(x.shape[0], 0.0)
        return LevelNorm.exactly(x.shape[0], operator_norm(self.assemble(x)))

    def _build_form(self, n, m):
        p, q = self.shape
        block = np.einsum("ik,jl,cab->iajbklc", np.eye(n), np.eye(m), self.basis)
        return NormForm([block.reshape(n * p, m * q, n * m * self.dim)], n * m * self.dim, 0)


def _compose_x(form, coord_map, n, m):
    """Re-express a form's element part through a per-entry coordinate map."""
    big = np.kron(np.eye(n * m), coord_map)
    blocks = []
    for b in form.blocks:
        bx = np.tensordot(b[:, :, : form.nx], big, axes=(2, 0))
        blocks.append(np.concatenate([bx, b[:, :, form.nx:]], axis=2))
    return NormForm(blocks, big.shape[1], form.naux)


class Subspace(OperatorSpace):
    """Subspace of ``parent`` with coordinates ``x -> inclusion @ x``."""

    kind = "subspace"

    def __init__(self, parent, inclusion, tol=None):
        inclusion = np.asarray(inclusion, dtype=complex).reshape(parent.dim, -1)
        super().__init__(inclusion.shape[1], tol or parent.tol)
        self.parent = parent
        self.inclusion = inclusion
        if self.dim and rank(inclusion, self.tol) < self.dim:
            raise InputError("subspace inclusion is not injective")

    def _build_form(self, n, m):
        return _compose_x(self.parent.compile(n, m), self.inclusion, n, m)

    def matrix_norm(self, x):
        x = _coerce(x, self.dim)
        if self.dim == 0:
            return LevelNorm.exactly(x.shape[0], 0.0)
        if self.parent.compilable:
            return super().matrix_norm(x)
        return self.parent.matrix_norm(x @ self.inclusion.T)


class Quotient(OperatorSpace):
    """``parent / span(kernel)`` in coordinates of an orthonormal complement.

    ``lift`` maps quotient coordinates to a representative; ``project`` is
    the quotient map.
    """

    kind = "quotient"

    def __init__(self, parent, kernel, tol=None):
        tol = tol or parent.tol
        kernel = np.asarray(kernel, dtype=complex).reshape(parent.dim, -1)
        self.kernel = range_basis(kernel, tol) if kernel.shape[1] else kernel
        self.complement = complement_basis(self.kernel, parent.dim, tol)
        super().__init__(self.complement.shape[1], tol)
        self.parent = parent

    def lift(self, x):
        return np.asarray(x) @ self.complement.T

    def project(self, y):
        return np.asarray(y) @ self.complement.conj()

    def _build_form(self, n, m):
        form = self.parent.compile(n, m)
        big_q = np.kron(np.eye(n * m), self.complement)
        big_k = np.kron(np.eye(n * m), self.kernel)
        blocks = []
        for b in form.blocks:
            bx = b[:, :, : form.nx]
            blocks.append(
                np.concatenate(
                    [np.tensordot(bx, big_q, axes=(2, 0)), np.tensordot(bx, big_k, axes=(2, 0)), b[:, :, form.nx:]],
                    axis=2,
                )
            )
        return NormForm(blocks, big_q.shape[1], big_k.shape[1] + form.naux)

    def matrix_norm(self, x):
        x = _coerce(x, self.dim)
        if self.dim == 0:
            return LevelNorm.exactly(x.shape[0], 0.0)
        if self.kernel.shape[1] == 0 and not self.parent.compilable:
            return self.parent.matrix_norm(self.lift(x))
        if not self.parent.compilable:
            raise UnsupportedError("quotient norms need a compilable parent space")
        return super().matrix_norm(x)


class DirectSum(OperatorSpace):
    """``left + right`` with the sum norm at every matrix level."""

    kind = "direct_sum"

    def __init__(self, left, right, tol=None):
        super().__init__(left.dim + right.dim, tol or left.tol)
        self.left = left
        self.right = right

    def split(self, x):
        x = np.asarray(x)
        return x[..., : self.left.dim], x[..., self.left.dim:]

    def _build_form(self, n, m):
        lf, rf = self.left.compile(n, m), self.right.compile(n, m)
        d, dl = self.dim, self.left.dim
        sel_l = np.zeros((n * m * dl, n * m * d))
        sel_r = np.zeros((n * m * (d - dl), n * m * d))
        for e in range(n * m):
            sel_l[e * dl:(e + 1) * dl, e * d:e * d + dl] = np.eye(dl)
            sel_r[e * (d - dl):(e + 1) * (d - dl), e * d + dl:(e + 1) * d] = np.eye(d - dl)
        naux = lf.naux + rf.naux
        blocks = []
        for b in lf.blocks:
            aux = np.zeros(b.shape[:2] + (naux,), complex)
            aux[:, :, : lf.naux] = b[:, :, lf.nx:]
            blocks.append(np.concatenate([np.tensordot(b[:, :, : lf.nx], sel_l, axes=(2, 0)), aux], axis=2))
        for b in rf.blocks:
            aux = np.zeros(b.shape[:2] + (naux,), complex)
            aux[:, :, lf.naux:] = b[:, :, rf.nx:]
            blocks.append(np.concatenate([np.tensordot(b[:, :, : rf.nx], sel_r, axes=(2, 0)), aux], axis=2))
        return NormForm(blocks, n * m * d, naux)

    def matrix_norm(self, x):
        x = _coerce(x, self.dim)
        xl, xr = self.split(x)
        a, b = self._part(self.left, xl), self._part(self.right, xr)
        if a.exact and b.exact:
            return LevelNorm.exactly(x.shape[0], a.value + b.value)
        return LevelNorm(
            x.shape[0], a.value + b.value, a.lower + b.lower, a.upper + b.upper,
            certified=a.certified and b.certified,
        )

    @staticmethod
    def _part(space, x):
        if space.dim == 0:
            return LevelNorm.exactly(x.shape[0], 0.0)
        return space.matrix_norm(x)


class HomSpace(OperatorSpace):
    """Linear maps ``A -> E`` normed as completely bounded maps.

    Coordinates of ``T`` are ``T[e, j] = (T(b_j))_e`` flattened row-major.
    A level-n element is the map ``a -> [T_vw(a)]`` into M_n(E); its norm is
    estimated from below by evaluating on unit-ball elements of M_k(A),
    ``k <= level_cap``, and bounded above through the coordinate functionals
    of A.
    """

    kind = "hom"

    def __init__(self, algebra, target, level_cap=2, samples=6, tol=None):
        super().__init__(algebra.dim * target.dim, tol or target.tol)
        self.algebra = algebra
        self.target = target
        self.level_cap = level_cap
        self.samples = samples

    def evaluate(self, t, a):
        """``T(a)`` for coordinates ``t`` of shape ``(.., dim)`` and ``a`` in A."""
        t = np.asarray(t).reshape(np.shape(t)[:-1] + (self.target.dim, self.algebra.dim))
        return t @ np.asarray(a)

    def candidates(self, seed=0):
        alg = self.algebra
        rng = np.random.default_rng(seed)
        out = [np.asarray(alg.unit_coords).reshape(1, 1, -1)]
        for j in range(alg.dim):
            e = np.eye(alg.dim, dtype=complex)[j]
            out.append(e.reshape(1, 1, -1))
        for _ in range(self.samples):
            out.append(alg.space.random_element(rng, 1))
        for k in range(2, self.level_cap + 1):
            for _ in range(self.samples):
                out.append(alg.space.random_element(rng, k))
        normalized = []
        for a in out:
            s = alg.space.matrix_norm(a).value
            if s > 0:
                normalized.append(a / s)
        return normalized

    def image(self, t, a):
        """``[T_vw(a_pq)]`` as an element of M_{kn, km}(E)."""
        n, m, _ = t.shape
        k = a.shape[0]
        tm = t.reshape(n, m, self.target.dim, self.algebra.dim)
        img = np.einsum("vwej,pqj->pvqwe", tm, a)
        return img.reshape(k * n, k * m, self.target.dim)

    def matrix_norm(self, x):
        x = _coerce(x, self.dim)
        n = x.shape[0]
        if self.dim == 0 or not np.any(x):
            return LevelNorm.exactly(n, 0.0)
        best_value, best_lower, best = 0.0, 0.0, None
        for a in self.candidates():
            res = self.target.matrix_norm(self.image(x, a))
            if res.value > best_value:
                best_value, best = res.value, a
            best_lower = max(best_lower, res.lower)
        if best is not None and self.target.exact_norms:
            best_value = self._climb(x, best, best_value)
            best_lower = max(best_lower, best_value)
        upper = self._upper(x)
        if self.algebra.dim == 1:
            return LevelNorm.exactly(n, best_value)
        return LevelNorm(n, best_value, best_lower, max(upper, best_value))

    def _climb(self, x, a, value, steps=24):
        rng = np.random.default_rng(7)
        alg = self.algebra
        scale = 0.3
        for _ in range(steps):
            trial = a + scale * alg.space.random_element(rng, a.shape[0])
            s = alg.space.matrix_norm(trial).value
            if s == 0:
                continue
            trial = trial / s
            v = self.target.matrix_norm(self.image(x, trial)).value
            if v > value:
                a, value = trial, v
            else:
                scale *= 0.7
        return value

    def _upper(self, x):
        alg = self.algebra
        total = 0.0
        for j in range(alg.dim):
            e = np.eye(alg.dim, dtype=complex)[j]
            coeff = alg.space.functional_norm_upper(e)
            part = self.target.matrix_norm(self.image(x, e.reshape(1, 1, -1)))
            total += coeff * part.upper
        return total


class HaagerupTensor(OperatorSpace):
    """Algebraic ``E (x) A`` with Haagerup bounds; coordinates ``(e, j)`` row-major."""

    kind = "haagerup"

    def __init__(self, left, algebra, tol=None):
        super().__init__(left.dim * algebra.dim, tol or left.tol)
        self.left = left
        self.algebra = algebra

    def matrix_norm(self, x):
        from .haagerup import haagerup_bounds

        x = _coerce(x, self.dim)
        b = haagerup_bounds(self, x)
        return LevelNorm(x.shape[0], b.upper, b.lower, b.upper, certified=b.certified)


# -- constructors ------------------------------------------------------------


def zero_space(tol=None):
    return Concrete(np.zeros((0, 1, 1), complex), tol)


def concrete_space(basis, tol=None):
    return Concrete(basis, tol)


def subspace(parent, inclusion):
    return Subspace(parent, inclusion)


def quotient_space(space, kernel):
    """Quotient of ``space`` by the span of the columns of ``kernel``."""
    kernel = np.asarray(kernel, dtype=complex).reshape(space.dim, -1)
    return Quotient(space, kernel)


def direct_sum(left, right):
    return DirectSum(left, right)


def matrix_norm(space, x):
    return space.matrix_norm(x)


# -- linear maps and cb norms -------------------------------------------------


@dataclass
class LinearMap:
    src: OperatorSpace
    dst: OperatorSpace
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (self.dst.dim, self.src.dim):
            raise DimensionError(
                f"map matrix {self.matrix.shape} does not match {self.dst.dim} x {self.src.dim}"
            )

    def amplify(self, x):
        return np.asarray(x) @ self.matrix.T

    def compose(self, other):
        return LinearMap(other.src, self.dst, self.matrix @ other.matrix)


def _default_cap(space):
    if isinstance(space, Concrete):
        return max(space.shape), True
    return 3, False


def cb_norm_estimate(f, level_cap=None, samples=12, seed=0, climb=True, basis_trials=True):
    """Sampled lower estimate of ``|f|_cb`` over levels ``1..level_cap``.

    The running maximum is reported per level (padding with zeros embeds
    level n into level n+1, so the sequence is a valid non-decreasing chain of
    lower estimates).  ``upper`` comes from the coordinate expansion
    ``f = sum_k c_k (x) f(e_k)``.  ``basis_trials`` adds every coordinate
    vector at level 1, which is costly when source norms are slow.
    """
    default_cap, at_cap = _default_cap(f.dst)
    cap = level_cap or default_cap
    exact_at_cap = at_cap and cap >= default_cap
    rng = np.random.default_rng(seed)
    if f.src.dim == 0 or not np.any(f.matrix):
        return LevelNorm(cap, 0.0, 0.0, 0.0, exact=True, per_level=(0.0,) * cap, exact_at_cap=exact_at_cap)
    running, running_lower, per_level = 0.0, 0.0, []
    cheap = f.src.exact_norms and f.dst.exact_norms
    for n in range(1, cap + 1):
        trials = [f.src.random_element(rng, n) for _ in range(samples)]
        if n == 1 and basis_trials:
            trials += [np.eye(f.src.dim)[k].reshape(1, 1, -1) for k in range(f.src.dim)]
        best, best_x, scored = 0.0, None, []
        for x in trials:
            ratio, lower = _ratio(f, x)
            running_lower = max(running_lower, lower)
            scored.append((ratio, x))
            if ratio > best:
                best, best_x = ratio, x
        if climb and cheap and best_x is not None:
            if isinstance(f.src, Concrete) and isinstance(f.dst, Concrete):
                scored.sort(key=lambda item: -item[0])
                best = max([best] + [_ascend_ratio(f, x) for _, x in scored[:3]])
            else:
                best = _climb_ratio(f, best_x, best, rng)
            running_lower = max(running_lower, best)
        running = max(running, best)
        per_level.append(running)
    upper = _cb_upper(f)
    return LevelNorm(
        cap, running, running_lower, max(upper, running), exact=False,
        per_level=tuple(per_level), exact_at_cap=exact_at_cap,
    )


def _ratio(f, x):
    nx = f.src.matrix_norm(x)
    if nx.value <= 0:
        return 0.0, 0.0
    ny = f.dst.matrix_norm(f.amplify(x))
    lower = ny.lower / nx.upper if nx.upper > 0 else 0.0
    return ny.value / nx.value, lower


def _norm_subgradient(space, x):
    """``(|x|, G)`` with ``Re <h, G>`` the derivative of ``|x|`` along ``h`` (top singular pair)."""
    n, m, _ = x.shape
    p, q = space.shape
    big = space.assemble(x)
    u, s, vh = np.linalg.svd(big)
    uu = u[:, 0].reshape(n, p)
    vv = vh[0].conj().reshape(m, q)
    grad = np.einsum("ia,cab,jb->ijc", uu.conj(), space.basis, vv).conj()
    return float(s[0]), grad


def _ascend_ratio(f, x, steps=200):
    """Subgradient ascent of ``|f_n(x)| / |x|_n`` between concrete spaces."""
    def ratio_and_grad(y):
        nx, gx = _norm_subgradient(f.src, y)
        nf, gy = _norm_subgradient(f.dst, f.amplify(y))
        # chain rule through y -> y @ f.T: directions pull back by conj(f)
        gf = gy @ f.matrix.conj()
        return nf / nx, gf / nx - nf * gx / nx**2

    x = x / f.src.matrix_norm(x).value
    value, grad = ratio_and_grad(x)
    step = 0.5
    for _ in range(steps):
        trial = x + step * grad / max(np.linalg.norm(grad), 1e-300)
        trial = trial / f.src.matrix_norm(trial).value
        v, g = ratio_and_grad(trial)
        if v > value:
            x, value, grad = trial, v, g
            step *= 1.2
        else:
            step *= 0.5
            if step < 1e-10:
                break
    return value


def _climb_ratio(f, x, value, rng, steps=40):
    scale = 0.5
    for _ in range(steps):
        trial = x + scale * f.src.random_element(rng, x.shape[0]) / np.sqrt(x.size)
        r, _ = _ratio(f, trial)
        if r > value:
            x, value = trial, r
        else:
            scale *= 0.8
    return value


def _cb_upper(f):
    total = 0.0
    for k in range(f.src.dim):
        image = f.matrix[:, k]
        if not np.any(image):
            continue
        total += f.src.functional_norm_upper(np.eye(f.src.dim)[k]) * f.dst.matrix_norm(image).upper
    return total


# -- Ruan axioms ---------------------------------------------------------------


@dataclass
class RuanReport:
    samples: int
    seed: int
    r1_violations: int
    r2_violations: int
    r2_level1_violations: int
    worst_r1: float
    worst_r2: float
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return self.r1_violations == 0 and self.r2_violations == 0


def ruan_check(space, samples=50, seed=0, max_level=2):
    """Sample both Ruan axioms; violations beyond ``optimization_gap`` are counted."""
    rng = np.random.default_rng(seed)
    gap = space.tol.optimization_gap
    r1 = r2 = r2_one = 0
    worst1 = worst2 = 0.0
    for _ in range(samples):
        n = int(rng.integers(1, max_level + 1))
        m = int(rng.integers(1, max_level + 1))
        alpha = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        beta = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        x = space.random_element(rng, n)
        y = space.random_element(rng, m)
        nx = space.matrix_norm(x)
        lhs = space.matrix_norm(np.einsum("ab,bcd,ce->aed", alpha, x, beta, optimize=True))
        bound = operator_norm(alpha) * nx.upper * operator_norm(beta)
        excess = (lhs.lower - bound) / max(1.0, bound)
        worst1 = max(worst1, excess)
        if excess > gap:
            r1 += 1
        ny = space.matrix_norm(y)
        block = np.zeros((n + m, n + m, space.dim), complex)
        block[:n, :n] = x
        block[n:, n:] = y
        nb = space.matrix_norm(block)
        target = max(nx.value, ny.value)
        err = max(nb.lower - max(nx.upper, ny.upper), max(nx.lower, ny.lower) - nb.upper)
        worst2 = max(worst2, err / max(1.0, target))
        if err > gap * max(1.0, target):
            r2 += 1
            if n == 1 and m == 1:
                r2_one += 1
    notes = []
    if _has_sum_norm(space):
        notes.append(
            "direct sums carry the sum norm; R1 holds, R2 only up to the equivalence "
            "max <= sum <= 2 max with any concrete realization"
        )
    return RuanReport(samples, seed, r1, r2, r2_one, worst1, worst2, notes)


def _has_sum_norm(space):
    if isinstance(space, DirectSum):
        return space.left.dim > 0 and space.right.dim > 0
    for child in ("parent",):
        if hasattr(space, child):
            return _has_sum_norm(getattr(space, child))
    return False
