"""Right operator modules over a unital operator algebra and their morphisms.

A module stores the right action as an array ``action[j]`` of coordinate
matrices with ``x . b_j = action[j] @ x``.  Constructions (kernels,
cokernels, pullbacks, pushouts, direct sums, Hom modules) return new modules
whose spaces are the corresponding operator-space nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionError, InputError, ModuleAxiomError
from .numerics import null_space, range_basis, rank, resolve_tol, complement_basis
from .opspace import (
    DirectSum,
    HomSpace,
    LinearMap,
    Quotient,
    Subspace,
    cb_norm_estimate,
    quotient_space,
    zero_space,
)


class OpModule:
    """Operator space with a unital right action of ``algebra``."""

    def __init__(self, space, algebra, action, name=None):
        self.space = space
        self.algebra = algebra
        self.action = np.asarray(action, dtype=complex)
        self.name = name
        if self.action.shape != (algebra.dim, space.dim, space.dim):
            raise DimensionError(
                f"action must have shape {(algebra.dim, space.dim, space.dim)}, got {self.action.shape}"
            )

    def __repr__(self):
        label = self.name or "OpModule"
        return f"<{label} dim={self.dim} over {self.algebra!r}>"

    @property
    def dim(self):
        return self.space.dim

    @property
    def tol(self):
        return self.algebra.tol

    def action_of(self, a):
        return np.tensordot(np.asarray(a, dtype=complex), self.action, axes=(0, 0))

    def act(self, x, a):
        """``x . a`` for coordinates ``x`` (last axis) and algebra coordinates ``a``."""
        return np.asarray(x) @ self.action_of(a).T

    def act_matrix(self, x, a):
        """Matrix-level action ``(x . a)_{ik} = sum_j x_ij . a_jk`` at level n."""
        return np.einsum("ijd,jkc,cfd->ikf", x, a, self.action, optimize=True)

    @cached_property
    def generator_actions(self):
        return [self.action_of(g) for g in self.algebra.generators]

    @cached_property
    def identity(self):
        return ModMorphism(self, self, np.eye(self.dim, dtype=complex))


def _residual(a, b):
    return float(np.linalg.norm(a - b))


def make_module(space, algebra, action, name=None, samples=6, seed=0):
    """Validated module: associativity, unitality and sampled contractivity."""
    mod = OpModule(space, algebra, action, name=name)
    tol = algebra.tol.exact_residual
    scale = max(1.0, float(np.max(np.abs(mod.action))) if mod.action.size else 1.0)
    unit = mod.action_of(algebra.unit_coords)
    if _residual(unit, np.eye(mod.dim)) > tol * scale:
        raise ModuleAxiomError("non-degenerate", "the unit of the algebra does not act as the identity")
    c = algebra.structure
    for i in range(algebra.dim):
        for j in range(algebra.dim):
            lhs = np.tensordot(c[i, j], mod.action, axes=(0, 0))
            if _residual(lhs, mod.action[j] @ mod.action[i]) > tol * scale * scale:
                raise ModuleAxiomError(
                    "associativity", f"x.(b_{i} b_{j}) differs from (x.b_{i}).b_{j}"
                )
    if space.exact_norms and mod.dim:
        rng = np.random.default_rng(seed)
        gap = algebra.tol.optimization_gap
        for _ in range(samples):
            n = int(rng.integers(1, 3))
            x = space.random_element(rng, n)
            a = algebra.space.random_element(rng, n)
            lhs = space.matrix_norm(mod.act_matrix(x, a)).value
            rhs = space.matrix_norm(x).value * algebra.space.matrix_norm(a).value
            if lhs > rhs * (1 + gap) + gap:
                raise ModuleAxiomError(
                    "contractivity", f"|x.a|_{n} = {lhs:.6g} exceeds |x|_{n} |a|_{n} = {rhs:.6g}"
                )
    return mod


def regular_module(algebra):
    return OpModule(algebra.space, algebra, algebra.right_mult, name="A")


def concrete_module(algebra, matrices, name=None):
    """Right submodule of M_{p,N} generated by ``matrices`` (shape ``(k, p, N)``).

    The space is ``span{g b_j}`` with an orthonormal Frobenius basis and the
    action is right multiplication.
    """
    from .opspace import Concrete

    mats = np.asarray(matrices, dtype=complex)
    if mats.ndim == 2:
        mats = mats[None]
    if mats.shape[-1] != algebra.ambient_dim:
        raise DimensionError(f"generators need {algebra.ambient_dim} columns to be multiplied by the algebra")
    prods = np.einsum("kpa,jab->kjpb", mats, algebra.basis).reshape(-1, mats.shape[1] * mats.shape[2])
    rows = range_basis(np.vstack([mats.reshape(len(mats), -1), prods]).T, algebra.tol).T
    basis = rows.reshape(-1, mats.shape[1], mats.shape[2])
    if len(basis) == 0:
        return zero_module(algebra)
    moved = np.einsum("ipa,jab->jipb", basis, algebra.basis).reshape(algebra.dim, len(basis), -1)
    # action[j][k, i] = <B_k, B_i b_j>
    action = np.einsum("kx,jix->jki", rows.conj(), moved)
    return OpModule(Concrete(basis, tol=algebra.tol), algebra, action, name=name)


def zero_module(algebra):
    return OpModule(zero_space(algebra.tol), algebra, np.zeros((algebra.dim, 0, 0)), name="0")


class ModMorphism:
    """Equivariant linear map; ``matrix`` acts on coordinates."""

    def __init__(self, src, dst, matrix):
        self.src = src
        self.dst = dst
        self.matrix = np.asarray(matrix, dtype=complex).reshape(dst.dim, src.dim)

    def __repr__(self):
        return f"<ModMorphism {self.src.dim} -> {self.dst.dim}>"

    def __call__(self, x):
        return np.asarray(x) @ self.matrix.T

    def __matmul__(self, other):
        return compose(self, other)

    def __add__(self, other):
        return ModMorphism(self.src, self.dst, self.matrix + other.matrix)

    def __sub__(self, other):
        return ModMorphism(self.src, self.dst, self.matrix - other.matrix)

    def scaled(self, s):
        return ModMorphism(self.src, self.dst, s * self.matrix)

    @property
    def linear(self):
        return LinearMap(self.src.space, self.dst.space, self.matrix)

    @cached_property
    def cb_estimate(self):
        return cb_norm_estimate(self.linear, level_cap=2, samples=6)

    @property
    def rank(self):
        return rank(self.matrix, self.src.tol)

    def equivariance_residual(self, full=False):
        return equivariance_residual(self.src, self.dst, self.matrix, full=full)


def equivariance_residual(src, dst, matrix, full=False):
    if full:
        pairs = zip(src.action, dst.action)
    else:
        pairs = zip(src.generator_actions, dst.generator_actions)
    worst = 0.0
    for rs, rd in pairs:
        worst = max(worst, _residual(matrix @ rs, rd @ matrix))
    return worst


def make_morphism(src, dst, matrix):
    """Validated morphism: equivariance on every basis element of the algebra."""
    if src.algebra is not dst.algebra:
        raise InputError("morphisms must join modules over the same algebra")
    f = ModMorphism(src, dst, matrix)
    scale = max(1.0, float(np.linalg.norm(f.matrix)))
    if f.equivariance_residual(full=True) > src.tol.exact_residual * scale:
        raise ModuleAxiomError("equivariance", "f(x.a) differs from f(x).a")
    return f


def compose(f, g):
    """``f o g``."""
    if g.dst.dim != f.src.dim:
        raise DimensionError("morphisms are not composable")
    return ModMorphism(g.src, f.dst, f.matrix @ g.matrix)


def zero_morphism(src, dst):
    return ModMorphism(src, dst, np.zeros((dst.dim, src.dim), complex))


def equivariance_operator(src, dst):
    """Linear operator on vec(X) (row-major, X of shape dst x src) whose null space is Hom_A."""
    ds, dd = src.dim, dst.dim
    rows = [
        np.kron(np.eye(dd), rs.T) - np.kron(rd, np.eye(ds))
        for rs, rd in zip(src.generator_actions, dst.generator_actions)
    ]
    if not rows:
        return np.zeros((0, dd * ds), complex)
    return np.vstack(rows)


def hom_basis(src, dst):
    """Basis of Hom_A(src, dst) as an array of shape ``(q, dst.dim, src.dim)``."""
    ds, dd = src.dim, dst.dim
    if ds == 0 or dd == 0:
        return np.zeros((0, dd, ds), complex)
    op = equivariance_operator(src, dst)
    basis = null_space(op, src.tol) if op.shape[0] else np.eye(dd * ds, dtype=complex)
    return basis.T.reshape(-1, dd, ds)


# -- submodules and quotients ----------------------------------------------


def _columns(dim, basis):
    basis = np.asarray(basis, dtype=complex)
    if basis.size == 0:
        return np.zeros((dim, 0), complex)
    return basis.reshape(dim, -1)


def generated_submodule(module, vectors):
    """Orthonormal coordinate basis of the submodule generated by ``vectors`` (columns)."""
    vectors = _columns(module.dim, vectors)
    if vectors.shape[1] == 0:
        return np.zeros((module.dim, 0), complex)
    images = [r @ vectors for r in module.action]
    return range_basis(np.hstack([vectors] + images), module.tol)


def _check_invariant(module, basis):
    tol = module.tol.exact_residual
    proj = np.eye(module.dim) - basis @ basis.conj().T
    for r in module.action:
        if np.linalg.norm(proj @ r @ basis) > tol * max(1.0, np.linalg.norm(r)):
            raise ModuleAxiomError("submodule", "subspace is not invariant under the action")


def _orthonormalized(basis, tol):
    if basis.shape[1] == 0:
        return basis
    if basis.shape[1] <= basis.shape[0]:
        gram = basis.conj().T @ basis
        if np.linalg.norm(gram - np.eye(basis.shape[1])) < 1e-13:
            return basis
    return range_basis(basis, tol)


def submodule(module, basis, check=True):
    """Submodule spanned by the columns of ``basis``; returns ``(K, inclusion)``."""
    basis = _columns(module.dim, basis)
    w = _orthonormalized(basis, module.tol)
    if w.shape[1] == module.dim and module.dim:
        return module, module.identity
    if check:
        _check_invariant(module, w)
    action = w.conj().T @ module.action @ w
    sub = OpModule(Subspace(module.space, w), module.algebra, action)
    return sub, ModMorphism(sub, module, w)


def quotient_module(module, basis, check=True):
    """``module / span(basis)``; returns ``(C, projection)``."""
    basis = _columns(module.dim, basis)
    k = _orthonormalized(basis, module.tol)
    if k.shape[1] == 0:
        return module, module.identity
    if check:
        _check_invariant(module, k)
    space = Quotient(module.space, k)
    q = space.complement
    action = q.conj().T @ module.action @ q
    quo = OpModule(space, module.algebra, action)
    return quo, ModMorphism(module, quo, q.conj().T)


def kernel(f):
    """``(K, mu)`` with ``K = f^{-1}(0)`` and ``mu`` the inclusion."""
    if not np.any(f.matrix) or f.dst.dim == 0:
        return f.src, f.src.identity
    return submodule(f.src, null_space(f.matrix, f.src.tol), check=False)


def cokernel(f):
    """``(C, pi)`` with ``C = dst / f(src)`` (ranges are closed at finite dimension)."""
    image = range_basis(f.matrix, f.src.tol) if f.src.dim else np.zeros((f.dst.dim, 0))
    return quotient_module(f.dst, image, check=False)


# -- factorizations through universal arrows --------------------------------


def _solve_left(mat, rhs, tol):
    """``X`` with ``mat @ X = rhs`` (least squares) and the residual."""
    if mat.shape[1] == 0:
        x = np.zeros((0, rhs.shape[1]), complex)
    else:
        x, *_ = np.linalg.lstsq(mat, rhs, rcond=tol.rank_tol)
    return x, float(np.linalg.norm(mat @ x - rhs)) if rhs.size else 0.0


def factor_through_mono(mono, g):
    """``h`` with ``mono o h = g``; returns ``(h, residual)``."""
    h, res = _solve_left(mono.matrix, g.matrix, mono.src.tol)
    return ModMorphism(g.src, mono.src, h), res


def factor_through_epi(epi, g):
    """``h`` with ``h o epi = g``; returns ``(h, residual)``."""
    ht, res = _solve_left(epi.matrix.T, g.matrix.T, epi.src.tol)
    return ModMorphism(epi.dst, g.dst, ht.T), res


# -- direct sums, pullbacks, pushouts ----------------------------------------


@dataclass
class DirectSumModule:
    module: OpModule
    iota_left: ModMorphism
    iota_right: ModMorphism
    pi_left: ModMorphism
    pi_right: ModMorphism

    def __iter__(self):
        return iter((self.module, self.iota_left, self.iota_right, self.pi_left, self.pi_right))


def direct_sum_module(left, right):
    if left.algebra is not right.algebra:
        raise InputError("direct sums need modules over the same algebra")
    dl, dr = left.dim, right.dim
    action = np.zeros((left.algebra.dim, dl + dr, dl + dr), complex)
    action[:, :dl, :dl] = left.action
    action[:, dl:, dl:] = right.action
    g = OpModule(DirectSum(left.space, right.space), left.algebra, action)
    eye = np.eye(dl + dr, dtype=complex)
    return DirectSumModule(
        g,
        ModMorphism(left, g, eye[:, :dl]),
        ModMorphism(right, g, eye[:, dl:]),
        ModMorphism(g, left, eye[:dl]),
        ModMorphism(g, right, eye[dl:]),
    )


def direct_sum_of_morphisms(f, g):
    """``f (+) g`` between the direct sums of sources and targets."""
    src = direct_sum_module(f.src, g.src)
    dst = direct_sum_module(f.dst, g.dst)
    mat = np.zeros((dst.module.dim, src.module.dim), complex)
    mat[: f.dst.dim, : f.src.dim] = f.matrix
    mat[f.dst.dim:, f.src.dim:] = g.matrix
    return ModMorphism(src.module, dst.module, mat), src, dst


@dataclass
class PullbackSquare:
    module: OpModule
    leg_left: ModMorphism
    leg_right: ModMorphism
    inclusion: ModMorphism
    f_left: ModMorphism
    f_right: ModMorphism
    commutes: float
    cokernel_preserved: bool | None


def pullback(f_left, f_right):
    """Pullback of ``f_left: E -> G`` and ``f_right: F -> G``.

    ``L = {(x, y) : f_left(x) = f_right(y)}`` inside ``E (+) F``.
    """
    if f_left.dst is not f_right.dst and f_left.dst.dim != f_right.dst.dim:
        raise DimensionError("pullback needs a common codomain")
    s = direct_sum_module(f_left.src, f_right.src)
    joint = np.hstack([f_left.matrix, -f_right.matrix])
    if s.module.dim == 0:
        basis = np.zeros((0, 0), complex)
    elif joint.shape[0] == 0 or not np.any(joint):
        basis = np.eye(s.module.dim, dtype=complex)
    else:
        basis = null_space(joint, f_left.src.tol)
    module, incl = submodule(s.module, basis, check=False)
    leg_l = compose(s.pi_left, incl)
    leg_r = compose(s.pi_right, incl)
    comm = _residual(f_left.matrix @ leg_l.matrix, f_right.matrix @ leg_r.matrix)
    preserved = None
    if f_left.rank == f_left.dst.dim:
        preserved = leg_r.rank == f_right.src.dim
    return PullbackSquare(module, leg_l, leg_r, incl, f_left, f_right, comm, preserved)


def pullback_mediator(square, g_left, g_right):
    """Unique ``u: X -> L`` with ``leg_left u = g_left`` and ``leg_right u = g_right``."""
    stacked = ModMorphism(g_left.src, square.inclusion.dst, np.vstack([g_left.matrix, g_right.matrix]))
    return factor_through_mono(square.inclusion, stacked)


@dataclass
class PushoutSquare:
    module: OpModule
    leg_left: ModMorphism
    leg_right: ModMorphism
    projection: ModMorphism
    f_left: ModMorphism
    f_right: ModMorphism
    commutes: float
    kernel_preserved: bool | None


def pushout(f_left, f_right):
    """Pushout of ``f_left: G -> E`` and ``f_right: G -> F``.

    ``C = (E (+) F) / H`` with ``H = {(f_left(z), -f_right(z))}``.
    """
    if f_left.src.dim != f_right.src.dim:
        raise DimensionError("pushout needs a common domain")
    s = direct_sum_module(f_left.dst, f_right.dst)
    h = np.vstack([f_left.matrix, -f_right.matrix])
    span = range_basis(h, f_left.src.tol) if h.size else np.zeros((s.module.dim, 0))
    module, proj = quotient_module(s.module, span, check=False)
    leg_l = compose(proj, s.iota_left)
    leg_r = compose(proj, s.iota_right)
    comm = _residual(leg_l.matrix @ f_left.matrix, leg_r.matrix @ f_right.matrix)
    preserved = None
    if f_left.rank == f_left.src.dim:
        preserved = leg_r.rank == f_right.dst.dim
    return PushoutSquare(module, leg_l, leg_r, proj, f_left, f_right, comm, preserved)


def pushout_mediator(square, k_left, k_right):
    """Unique ``u: C -> Y`` with ``u leg_left = k_left`` and ``u leg_right = k_right``."""
    joined = ModMorphism(square.projection.src, k_left.dst, np.hstack([k_left.matrix, k_right.matrix]))
    return factor_through_epi(square.projection, joined)


# -- Hom modules ---------------------------------------------------------------


def hom_module(algebra, module, level_cap=2):
    """``Hom(A, E)`` with ``(T.a)(b) = T(ab)``; coordinates ``T[e, j] = T(b_j)_e``."""
    if module.algebra is not algebra:
        raise InputError("module is over a different algebra")
    de = module.dim
    action = np.array([np.kron(np.eye(de), algebra.left_mult[j].T) for j in range(algebra.dim)])
    space = HomSpace(algebra, module.space, level_cap=level_cap)
    return OpModule(space, algebra, action, name=f"Hom(A,{module.name or 'E'})")


def canonical_embedding(module, hom=None):
    """``iota: E -> Hom(A, E)``, ``iota(x)(a) = x.a``; returns ``(Hom(A,E), iota)``."""
    hom = hom or hom_module(module.algebra, module)
    da = module.algebra.dim
    mat = np.zeros((module.dim * da, module.dim), complex)
    for j in range(da):
        mat[j::da, :] = module.action[j]
    return hom, ModMorphism(module, hom, mat)


def evaluation_at_unit(module, hom):
    """Linear left inverse ``T -> T(1)`` of the canonical embedding."""
    da = module.algebra.dim
    u = module.algebra.unit_coords
    mat = np.kron(np.eye(module.dim), u.reshape(1, da))
    return LinearMap(hom.space, module.space, mat)


# -- classification ------------------------------------------------------------


@dataclass
class MorphismClassification:
    mono: bool
    epi: bool
    kernel_map: bool
    cokernel_map: bool
    rank: int
    openness_constant: float | None
    openness_samples: int
    inverse_bound: float | None


def classify(f, samples=4, seed=0, levels=2, estimate_bounds=True):
    """Mono/epi/kernel/cokernel flags with sampled openness constant.

    At finite dimension a mono is automatically a kernel map (ranges are
    closed and the inverse onto the range is bounded) and an epi is a
    cokernel map; the inverse bound and an openness constant are computed
    from samples.
    """
    tol = resolve_tol(f.src.tol)
    r = f.rank
    mono = r == f.src.dim
    epi = r == f.dst.dim
    inverse_bound = None
    if mono and estimate_bounds and f.src.dim:
        rng_basis = range_basis(f.matrix, tol)
        image = Subspace(f.dst.space, rng_basis)
        inv = np.linalg.pinv(rng_basis.conj().T @ f.matrix)
        inverse_bound = cb_norm_estimate(LinearMap(image, f.src.space, inv), level_cap=levels, samples=samples, seed=seed, climb=False).value
    lam = None
    taken = 0
    if epi and estimate_bounds and f.dst.dim:
        rng = np.random.default_rng(seed)
        ker = null_space(f.matrix, tol) if f.src.dim > r else np.zeros((f.src.dim, 0))
        quo = quotient_space(f.src.space, ker)
        pinv = np.linalg.pinv(f.matrix)
        worst = 0.0
        for _ in range(samples):
            n = int(rng.integers(1, levels + 1))
            y = f.dst.space.random_element(rng, n)
            ny = f.dst.space.matrix_norm(y)
            if ny.lower <= 0:
                continue
            pre = quo.matrix_norm(quo.project(y @ pinv.T))
            worst = max(worst, pre.upper / ny.lower)
            taken += 1
        lam = max(1.0, worst) * (1 + 1e-6)
    return MorphismClassification(mono, epi, mono, epi, r, lam, taken, inverse_bound)
