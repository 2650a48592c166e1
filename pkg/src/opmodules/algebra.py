"""Finite-dimensional unital operator algebras represented inside some M_N."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import AlgebraError, DimensionError, InputError, UnsupportedError
from .numerics import as_complex, null_space, range_basis, rank, resolve_tol, solve_affine


@dataclass(frozen=True)
class SemisimpleBlocks:
    """Block sizes and matrix units ``e^k_{ij}`` as algebra coordinates.

    ``units[k][i][j]`` is the coordinate vector of ``e^k_{ij}``.
    """

    sizes: tuple
    units: tuple

    def unit(self, k, i, j):
        return self.units[k][i][j]

    def all_units(self):
        for k, m in enumerate(self.sizes):
            for i in range(m):
                for j in range(m):
                    yield k, i, j, self.units[k][i][j]


class OperatorAlgebra:
    """Unital subalgebra of M_N given by a basis of N x N matrices.

    Structure constants ``c[i, j, k]`` satisfy ``b_i b_j = sum_k c[i,j,k] b_k``.
    ``added`` counts basis elements introduced by closing the span under
    multiplication.
    """

    def __init__(self, basis, unit_coords, blocks=None, tol=None, added=0, name=None):
        self.tol = resolve_tol(tol)
        self.basis = as_complex(basis, "basis")
        if self.basis.ndim != 3 or self.basis.shape[1] != self.basis.shape[2]:
            raise DimensionError(f"basis must have shape (dim, N, N), got {self.basis.shape}")
        self.dim, self.ambient_dim = self.basis.shape[0], self.basis.shape[1]
        self.unit_coords = as_complex(unit_coords, "unit").reshape(self.dim)
        self.blocks = blocks
        self.added = added
        self.name = name
        self._flat = self.basis.reshape(self.dim, -1).T
        self.structure = self._structure_constants()
        self._check_unit()

    def __repr__(self):
        label = self.name or "OperatorAlgebra"
        return f"<{label} dim={self.dim} in M_{self.ambient_dim}>"

    def _structure_constants(self):
        products = np.einsum("iab,jbc->ijac", self.basis, self.basis).reshape(self.dim * self.dim, -1)
        coeffs, *_ = np.linalg.lstsq(self._flat, products.T, rcond=None)
        residual = np.linalg.norm(self._flat @ coeffs - products.T)
        if residual > self.tol.exact_residual * max(1.0, np.linalg.norm(products)):
            raise AlgebraError(f"basis span is not closed under multiplication (residual {residual:.2e})")
        return coeffs.T.reshape(self.dim, self.dim, self.dim)

    def _check_unit(self):
        u = self.unit
        for b in self.basis:
            if np.linalg.norm(u @ b - b) > self.tol.exact_residual or np.linalg.norm(b @ u - b) > self.tol.exact_residual:
                raise AlgebraError("unit coordinates do not give a two-sided identity")

    # -- elements ----------------------------------------------------------

    @property
    def unit(self):
        return self.element(self.unit_coords)

    def element(self, coords):
        coords = np.asarray(coords, dtype=complex)
        return np.tensordot(coords, self.basis, axes=(0, 0))

    def coords(self, matrix):
        m = as_complex(matrix).reshape(-1)
        if m.shape[0] != self._flat.shape[0]:
            raise DimensionError("matrix size does not match the ambient algebra")
        sol = solve_affine(self._flat, m, self.tol)
        if not sol.feasible:
            raise InputError("matrix does not lie in the algebra")
        return sol.solution

    def multiply(self, a, b):
        return np.einsum("i,j,ijk->k", a, b, self.structure)

    def norm(self, coords):
        return float(np.linalg.norm(self.element(coords), 2))

    @cached_property
    def left_mult(self):
        # left_mult[j] @ x = coords of b_j x
        return np.transpose(self.structure, (0, 2, 1)).copy()

    @cached_property
    def right_mult(self):
        # right_mult[j] @ x = coords of x b_j, so right_mult[j][k, i] = c[i, j, k]
        return np.transpose(self.structure, (1, 2, 0)).copy()

    def left_operator(self, a):
        return np.tensordot(a, self.left_mult, axes=(0, 0))

    def right_operator(self, a):
        return np.tensordot(a, self.right_mult, axes=(0, 0))

    @cached_property
    def space(self):
        from .opspace import Concrete

        return Concrete(self.basis, tol=self.tol)

    @cached_property
    def generators(self):
        """Coordinate vectors that generate the algebra together with the unit.

        Equivariance of a linear map between unital modules only needs to be
        tested on these.
        """
        if self.dim == 1:
            return np.zeros((0, 1), complex)
        rng = np.random.default_rng(1234)
        for count in (1, 2, 3):
            gens = rng.normal(size=(count, self.dim)) + 1j * rng.normal(size=(count, self.dim))
            gens /= np.linalg.norm(gens, axis=1, keepdims=True)
            if self._generated_dim(gens) == self.dim:
                return gens
        gens = []
        for j in range(self.dim):
            if self._generated_dim(np.array(gens + [np.eye(self.dim)[j]], complex)) > self._generated_dim(np.array(gens, complex).reshape(-1, self.dim)):
                gens.append(np.eye(self.dim)[j])
        return np.array(gens, complex)

    def _generated_dim(self, gens):
        span = range_basis(self.unit_coords.reshape(-1, 1), self.tol)
        while True:
            pieces = [span] + [self.right_operator(g) @ span for g in gens]
            grown = range_basis(np.hstack(pieces), self.tol)
            if grown.shape[1] == span.shape[1]:
                return span.shape[1]
            span = grown

    def random_element(self, rng):
        c = rng.normal(size=self.dim) + 1j * rng.normal(size=self.dim)
        return c / max(self.norm(c), 1e-300)


def _frozen_units(nested):
    return tuple(tuple(tuple(row) for row in block) for block in nested)


def build_semisimple(sizes, tol=None, name=None):
    """Block-diagonal ``M_{m_1} + ... + M_{m_n}`` inside ``M_N``, ``N = sum m_k``."""
    sizes = [int(m) for m in sizes]
    if not sizes or any(m < 1 for m in sizes):
        raise InputError("sizes must be a non-empty list of positive integers")
    n_amb = sum(sizes)
    basis, units, offset, index = [], [], 0, 0
    for m in sizes:
        block = []
        for i in range(m):
            row = []
            for j in range(m):
                e = np.zeros((n_amb, n_amb), complex)
                e[offset + i, offset + j] = 1.0
                basis.append(e)
                row.append(index)
                index += 1
            block.append(row)
        units.append(block)
        offset += m
    dim = len(basis)
    eye = np.eye(dim, dtype=complex)
    coords = [[[eye[idx] for idx in row] for row in block] for block in units]
    unit = sum(coords[k][i][i] for k, m in enumerate(sizes) for i in range(m))
    blocks = SemisimpleBlocks(tuple(sizes), _frozen_units(coords))
    label = name or " + ".join(f"M_{m}" if m > 1 else "C" for m in sizes)
    return OperatorAlgebra(np.array(basis), unit, blocks=blocks, tol=tol, name=label)


def build_from_basis(n_ambient, basis, tol=None, name=None):
    """Close ``span(basis)`` under multiplication and locate its unit."""
    tol = resolve_tol(tol)
    mats = [as_complex(b, "basis element") for b in basis]
    if not mats:
        raise InputError("basis must be non-empty")
    for m in mats:
        if m.shape != (n_ambient, n_ambient):
            raise DimensionError(f"basis element of shape {m.shape} is not {n_ambient}x{n_ambient}")
    flat = np.array([m.reshape(-1) for m in mats]).T
    if rank(flat, tol) < len(mats):
        raise InputError("basis is linearly dependent")
    original = len(mats)
    while True:
        span = range_basis(np.array([m.reshape(-1) for m in mats]).T, tol)
        fresh = []
        for a in list(mats):
            for b in list(mats):
                p = (a @ b).reshape(-1)
                current = span if not fresh else range_basis(np.column_stack([span] + fresh), tol)
                perp = p - current @ (current.conj().T @ p)
                if np.linalg.norm(perp) > tol.exact_residual * max(1.0, np.linalg.norm(p)):
                    fresh.append(perp / np.linalg.norm(perp))
        if not fresh:
            break
        mats.extend(f.reshape(n_ambient, n_ambient) for f in fresh)
    dim = len(mats)
    arr = np.array(mats)
    struct_alg = _raw_structure(arr, tol)
    # unit equations: sum_k u_k c[k, j, :] = e_j and sum_k u_k c[j, k, :] = e_j
    eye = np.eye(dim)
    left = np.transpose(struct_alg, (1, 2, 0)).reshape(dim * dim, dim)
    right = np.transpose(struct_alg, (0, 2, 1)).reshape(dim * dim, dim)
    system = np.vstack([left, right])
    rhs = np.concatenate([eye.reshape(-1), eye.reshape(-1)])
    sol = solve_affine(system, rhs, tol)
    if not sol.feasible:
        raise AlgebraError("the span has no unit; only unital algebras are supported")
    return OperatorAlgebra(arr, sol.solution, tol=tol, added=dim - original, name=name)


def _raw_structure(arr, tol):
    dim = arr.shape[0]
    flat = arr.reshape(dim, -1).T
    products = np.einsum("iab,jbc->ijac", arr, arr).reshape(dim * dim, -1)
    coeffs, *_ = np.linalg.lstsq(flat, products.T, rcond=None)
    return coeffs.T.reshape(dim, dim, dim)


def upper_triangular(n, tol=None):
    basis = []
    for i in range(n):
        for j in range(i, n):
            e = np.zeros((n, n), complex)
            e[i, j] = 1.0
            basis.append(e)
    return build_from_basis(n, basis, tol=tol, name=f"T_{n}")


def radical(algebra):
    """Jacobson radical as an orthonormal coordinate basis (columns).

    Computed as the kernel of the trace form ``(x, y) -> tr(L_x L_y)``; the
    result is checked to be a two-sided nilpotent ideal.
    """
    lm = algebra.left_mult
    form = np.einsum("iab,jba->ij", lm, lm)
    rad = null_space(form, algebra.tol)
    _check_radical(algebra, rad)
    return rad


def _check_radical(algebra, rad):
    if rad.shape[1] == 0:
        return
    tol = algebra.tol
    proj = np.eye(algebra.dim) - rad @ rad.conj().T
    for j in range(algebra.dim):
        for op in (algebra.left_mult[j], algebra.right_mult[j]):
            if np.linalg.norm(proj @ op @ rad) > 1e3 * tol.exact_residual:
                raise AlgebraError("trace-form kernel is not a two-sided ideal")
    # rad^(dim+1) = 0: products of dim+1 radical elements vanish
    power = rad
    for _ in range(algebra.dim):
        power = range_basis(np.hstack([algebra.right_operator(r) @ power for r in rad.T]), tol)
        if power.shape[1] == 0:
            return
    raise AlgebraError("trace-form kernel is not nilpotent")


def is_semisimple(algebra):
    return radical(algebra).shape[1] == 0


def matrix_units(algebra):
    """Stored matrix units, re-verified."""
    blocks = algebra.blocks
    if blocks is None:
        raise UnsupportedError(
            "matrix units are only available for algebras built with explicit blocks"
        )
    tol = algebra.tol.exact_residual
    total = np.zeros(algebra.dim, complex)
    for k, i, j, e in blocks.all_units():
        if abs(algebra.norm(e) - 1) > tol:
            raise AlgebraError(f"matrix unit e^{k}_{i}{j} does not have norm one")
        if i == j:
            total += e
        for l, p, q, f in blocks.all_units():
            expect = blocks.unit(k, i, q) if (j == p and k == l) else np.zeros(algebra.dim)
            if np.linalg.norm(algebra.multiply(e, f) - expect) > tol:
                raise AlgebraError(f"e^{k}_{i}{j} e^{l}_{p}{q} has the wrong product")
    if np.linalg.norm(total - algebra.unit_coords) > tol:
        raise AlgebraError("diagonal matrix units do not sum to the unit")
    return blocks
