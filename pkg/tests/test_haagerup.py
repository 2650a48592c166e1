import numpy as np
import pytest

from opmodules import (
    action_contractivity_check,
    build_semisimple,
    canonical_projection,
    concrete_space,
    elementary_tensor,
    haagerup_norm_bounds,
    tensor_module,
    upper_triangular,
)
from opmodules.sampling import random_module


def column_space(n):
    basis = np.zeros((n, n, 1), complex)
    for i in range(n):
        basis[i, i, 0] = 1
    return concrete_space(basis)


@pytest.mark.parametrize("n", [2, 3])
def test_columns_tensor_algebra_is_the_column_of_the_algebra(n):
    # C_n (x)_h X is completely isometric to the column space C_n(X)
    alg = build_semisimple([2])
    tensor = tensor_module(column_space(n), alg)
    rng = np.random.default_rng(n)
    for _ in range(3):
        coeff = rng.normal(size=(n, alg.dim)) + 1j * rng.normal(size=(n, alg.dim))
        target = np.linalg.norm(np.vstack([alg.element(c) for c in coeff]), 2)
        hb = haagerup_norm_bounds(tensor, coeff.reshape(1, 1, -1))
        assert hb.lower <= target + 1e-7 and target <= hb.upper + 1e-7
        assert hb.gap < 1e-6


def test_elementary_tensors_have_product_norm():
    rng = np.random.default_rng(1)
    alg = upper_triangular(2)
    space = concrete_space(rng.normal(size=(3, 2, 2)) + 1j * rng.normal(size=(3, 2, 2)))
    tensor = tensor_module(space, alg)
    for _ in range(5):
        x, a = space.random_element(rng).ravel(), alg.space.random_element(rng).ravel()
        hb = haagerup_norm_bounds(tensor, elementary_tensor(x, a))
        product = space.norm(x) * alg.space.norm(a)
        assert abs(hb.upper - product) < 1e-6 and abs(hb.lower - product) < 1e-6


def test_factorization_reproduces_the_tensor():
    rng = np.random.default_rng(2)
    alg = build_semisimple([1, 1])
    space = concrete_space(rng.normal(size=(2, 2, 2)) + 0j)
    tensor = tensor_module(space, alg)
    u = tensor.space.random_element(rng, 2)
    hb = haagerup_norm_bounds(tensor, u)
    alpha, beta = hb.factorization
    rebuilt = np.einsum("ike,kja->ijea", alpha, beta).reshape(u.shape)
    assert np.allclose(rebuilt, u, atol=1e-7)
    assert hb.lower <= hb.upper and hb.gap < 1e-4 * max(1.0, hb.upper)


def test_zero_tensor():
    alg = build_semisimple([1])
    tensor = tensor_module(column_space(2), alg)
    hb = haagerup_norm_bounds(tensor, np.zeros(2))
    assert hb.upper == hb.lower == 0


@pytest.mark.parametrize("alg", [build_semisimple([2]), upper_triangular(2)], ids=["M_2", "T_2"])
def test_action_is_completely_contractive(alg):
    module = random_module(alg, np.random.default_rng(3), 6, allow_zero=False)
    report = action_contractivity_check(module, samples=16, levels=2)
    assert report.passed and report.worst_ratio <= 1 + 1e-6


def test_canonical_projection_has_the_unit_section():
    alg = build_semisimple([2, 3])
    module = random_module(alg, np.random.default_rng(4), 6, allow_zero=False)
    cp = canonical_projection(module)
    assert cp.residual < 1e-12
    assert cp.projection.equivariance_residual(full=True) < 1e-10
