import numpy as np
import pytest

from opmodules import AlgebraError, build_from_basis, build_semisimple, is_semisimple, matrix_units, radical, upper_triangular
from opmodules.errors import InputError, UnsupportedError


def products_agree(alg, rng):
    a, b = alg.random_element(rng), alg.random_element(rng)
    prod = alg.element(alg.multiply(a, b))
    return np.allclose(prod, alg.element(a) @ alg.element(b), atol=1e-10)


@pytest.mark.parametrize("sizes", [[1], [2], [2, 3], [1, 1, 1]])
def test_semisimple_structure_constants_reproduce_matrix_products(sizes):
    alg = build_semisimple(sizes)
    assert alg.dim == sum(m * m for m in sizes)
    rng = np.random.default_rng(0)
    assert all(products_agree(alg, rng) for _ in range(5))
    assert np.allclose(alg.element(alg.unit_coords), np.eye(sum(sizes)))


def test_matrix_units_multiply_like_matrix_units():
    alg = build_semisimple([2, 3])
    units = matrix_units(alg)
    assert units.sizes == (2, 3)
    for k, i, j, e in units.all_units():
        for l, p, q, f in units.all_units():
            expected = units.unit(k, i, q) if (k == l and j == p) else np.zeros(alg.dim)
            assert np.allclose(alg.multiply(e, f), expected, atol=1e-12)


@pytest.mark.parametrize("n, rad_dim", [(1, 0), (2, 1), (3, 3)])
def test_upper_triangular_radical_is_strict_part(n, rad_dim):
    alg = upper_triangular(n)
    rad = radical(alg)
    assert rad.shape[1] == rad_dim
    assert is_semisimple(alg) == (rad_dim == 0)
    for x in rad.T:
        assert np.allclose(np.tril(alg.element(x)), 0, atol=1e-10)


def test_semisimple_algebras_have_zero_radical():
    for sizes in ([1], [2], [2, 3]):
        assert radical(build_semisimple(sizes)).shape[1] == 0


def test_closure_under_products_adds_missing_elements():
    e12 = np.array([[0, 1], [0, 0]], complex)
    alg = build_from_basis(2, [np.eye(2), e12, e12.T])
    assert alg.dim == 4 and alg.added == 1


def test_span_without_unit_is_rejected():
    with pytest.raises(AlgebraError, match="unit"):
        build_from_basis(2, [np.array([[0, 1], [0, 0]], complex)])


def test_dependent_basis_is_rejected():
    with pytest.raises(InputError):
        build_from_basis(2, [np.eye(2), 2 * np.eye(2)])


def test_matrix_units_need_blocks():
    with pytest.raises(UnsupportedError):
        matrix_units(upper_triangular(2))


def test_generators_generate():
    rng = np.random.default_rng(1)
    for alg in (build_semisimple([2, 3]), upper_triangular(3)):
        span = [alg.unit_coords] + list(alg.generators)
        words = list(span)
        for _ in range(alg.dim):
            words = words + [alg.multiply(w, g) for w in words[-alg.dim:] for g in alg.generators]
            if np.linalg.matrix_rank(np.array(words), 1e-9) == alg.dim:
                break
        assert np.linalg.matrix_rank(np.array(words), 1e-9) == alg.dim
        assert products_agree(alg, rng)
