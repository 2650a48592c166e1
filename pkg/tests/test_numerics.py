import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from opmodules.errors import InputError
from opmodules.numerics import (
    TolerancePolicy,
    canonical_basis,
    complement_basis,
    hermitian_basis,
    min_opnorm_over_coset,
    min_sum_opnorm,
    null_space,
    operator_norm,
    range_basis,
    rank,
    solve_affine,
)


def cplx(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def test_tolerance_policy_rejects_inverted_thresholds():
    with pytest.raises(InputError):
        TolerancePolicy(rank_tol=1e-6, exact_residual=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**31))
def test_solve_affine_matches_pinv_on_consistent_systems(rows, cols, seed):
    rng = np.random.default_rng(seed)
    a = cplx(rng, rows, cols)
    b = a @ cplx(rng, cols)
    sol = solve_affine(a, b)
    assert sol.feasible
    assert np.allclose(sol.solution, np.linalg.pinv(a) @ b, atol=1e-8)


def test_solve_affine_witness_separates_rhs_from_range():
    a = np.array([[1.0], [0.0]])
    sol = solve_affine(a, np.array([0.0, 1.0]))
    assert not sol.feasible
    assert abs(np.vdot(sol.witness, a[:, 0])) < 1e-12
    assert np.vdot(sol.witness, [0.0, 1.0]).real > 0


def test_null_range_complement_are_orthogonal():
    rng = np.random.default_rng(3)
    m = cplx(rng, 7, 3) @ cplx(rng, 3, 5)
    n, r = null_space(m), range_basis(m)
    assert n.shape == (5, 2) and r.shape == (7, 3) and rank(m) == 3
    assert np.linalg.norm(m @ n) < 1e-10
    c = complement_basis(r, 7)
    assert c.shape == (7, 4) and np.linalg.norm(r.conj().T @ c) < 1e-12


def test_tall_null_space_agrees_with_gram_kernel():
    rng = np.random.default_rng(4)
    m = cplx(rng, 40, 4) @ cplx(rng, 4, 6)
    n = null_space(m)
    assert n.shape == (6, 2)
    assert np.allclose(n.conj().T @ n, np.eye(2))


def test_canonical_basis_is_basis_independent():
    rng = np.random.default_rng(5)
    basis = np.linalg.qr(cplx(rng, 5, 2))[0]
    mixed = basis @ np.linalg.qr(cplx(rng, 2, 2))[0]
    assert np.allclose(canonical_basis(basis), canonical_basis(mixed))


def test_coset_minimum_of_diagonal_family():
    # |diag(1, 0) + t diag(-1, 1)| is smallest at t = 1/2 with value 1/2
    point = np.diag([1.0, 0.0]).astype(complex)
    direction = np.diag([-1.0, 1.0]).astype(complex)[None]
    res = min_opnorm_over_coset(point, direction)
    assert abs(res.value - 0.5) < 1e-7
    assert res.value - res.lower < 1e-6
    assert abs(res.coefficients[0] - 0.5) < 1e-4


def test_sum_of_norms_dual_bound_is_valid():
    rng = np.random.default_rng(6)
    points = [cplx(rng, 2, 3), cplx(rng, 3, 2)]
    directions = [cplx(rng, 2, 2, 3), cplx(rng, 2, 3, 2)]
    res = min_sum_opnorm(points, directions)
    assert res.lower <= res.value + 1e-9
    value = sum(operator_norm(p + np.tensordot(res.coefficients, d, axes=(0, 0))) for p, d in zip(points, directions))
    assert abs(value - res.value) < 1e-6
    for _ in range(20):
        t = cplx(rng, 2)
        other = sum(operator_norm(p + np.tensordot(t, d, axes=(0, 0))) for p, d in zip(points, directions))
        assert other >= res.lower - 1e-9


def test_hermitian_basis_spans_hermitian_matrices():
    basis = hermitian_basis(3)
    assert len(basis) == 9
    for h in basis:
        assert np.allclose(h, h.conj().T)
    flat = np.array([np.concatenate([h.real.ravel(), h.imag.ravel()]) for h in basis])
    assert np.linalg.matrix_rank(flat) == 9
