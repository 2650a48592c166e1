import numpy as np
import pytest

from opmodules import LinearMap, build_semisimple, cb_norm_estimate, concrete_space, direct_sum, quotient_space, ruan_check, subspace
from opmodules.errors import InputError
from opmodules.numerics import operator_norm
from opmodules.opspace import HomSpace


def full_matrices(n):
    return concrete_space(np.eye(n * n).reshape(n * n, n, n))


def diagonal(n):
    basis = np.zeros((n, n, n))
    for i in range(n):
        basis[i, i, i] = 1
    return concrete_space(basis)


def test_concrete_norm_is_operator_norm_of_assembled_matrix():
    rng = np.random.default_rng(0)
    basis = rng.normal(size=(3, 2, 4)) + 1j * rng.normal(size=(3, 2, 4))
    space = concrete_space(basis)
    x = space.random_element(rng, 2)
    big = np.block([[np.tensordot(x[i, j], basis, axes=(0, 0)) for j in range(2)] for i in range(2)])
    assert abs(space.matrix_norm(x).value - operator_norm(big)) < 1e-12
    assert space.matrix_norm(x).exact


def test_non_injective_embedding_is_rejected():
    with pytest.raises(InputError):
        concrete_space(np.ones((2, 1, 1)))


def test_subspace_norm_is_restriction():
    rng = np.random.default_rng(1)
    parent = full_matrices(2)
    incl = rng.normal(size=(4, 2)) + 0j
    sub = subspace(parent, incl)
    x = sub.random_element(rng, 2)
    assert abs(sub.matrix_norm(x).value - parent.matrix_norm(x @ incl.T).value) < 1e-7


def test_quotient_of_l_infinity_by_constants():
    # C^2 with the max norm modulo (1, 1): the class of (a, b) has norm |a - b| / 2
    quo = quotient_space(diagonal(2), np.array([[1.0], [1.0]]))
    for a, b in [(1, 0), (3, -1), (2j, 1)]:
        coords = quo.project(np.array([a, b], complex))
        norm = quo.matrix_norm(coords.reshape(1, 1, -1))
        assert abs(norm.value - abs(a - b) / 2) < 1e-6
        assert norm.lower <= abs(a - b) / 2 + 1e-9 <= norm.upper + 2e-9


def test_direct_sum_carries_the_sum_norm():
    rng = np.random.default_rng(2)
    left, right = full_matrices(2), diagonal(3)
    total = direct_sum(left, right)
    for n in (1, 2, 3):
        x, y = left.random_element(rng, n), right.random_element(rng, n)
        norm = total.matrix_norm(np.concatenate([x, y], axis=2)).value
        assert abs(norm - left.matrix_norm(x).value - right.matrix_norm(y).value) < 1e-12


def test_ruan_axioms_hold_for_concrete_spaces():
    assert ruan_check(full_matrices(2), samples=30).passed


def test_sum_norm_is_flagged_by_ruan_check():
    report = ruan_check(direct_sum(diagonal(1), diagonal(1)), samples=30)
    assert report.notes


def test_transpose_has_cb_norm_two():
    m2 = full_matrices(2)
    perm = np.zeros((4, 4))
    for i in range(2):
        for j in range(2):
            perm[2 * j + i, 2 * i + j] = 1
    est = cb_norm_estimate(LinearMap(m2, m2, perm), level_cap=2)
    assert abs(est.per_level[0] - 1) < 1e-6
    # sampled ascent is a lower estimate of the true value 2
    assert 1.98 < est.value <= 2 + 1e-9
    assert est.upper >= 2 - 1e-9


def test_hom_from_scalars_is_isometric():
    rng = np.random.default_rng(3)
    scalars = build_semisimple([1])
    target = full_matrices(2)
    hom = HomSpace(scalars, target)
    x = rng.normal(size=(2, 2, 4)) + 1j * rng.normal(size=(2, 2, 4))
    assert abs(hom.matrix_norm(x).value - target.matrix_norm(x).value) < 1e-10
