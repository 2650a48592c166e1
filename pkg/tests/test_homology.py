import numpy as np
import pytest

from opmodules import (
    build_semisimple,
    concrete_space,
    global_dim_zero_certificate,
    is_rel_injective,
    is_rel_projective,
    non_projective_witness,
    regular_module,
    rel_injective_dimension,
    rel_injective_resolution,
    semisimple_retraction,
    tensor_module,
    upper_triangular,
)
from opmodules.definitions import load_fixture
from opmodules.errors import InputError
from opmodules.homology import algebraic_injective_dimension, dual_regular_module
from opmodules.sampling import random_module


@pytest.fixture(scope="module")
def t2():
    return load_fixture("t2")


# over T_2: S1 = A/{x11 = 0} and S2 = A/{x22 = 0}
@pytest.mark.parametrize(
    "name, projective, injective, idim",
    [("S1", False, True, 0), ("S2", True, False, 1), ("A", True, False, 1)],
)
def test_t2_simple_and_regular_modules(t2, name, projective, injective, idim):
    module = t2.modules[name]
    assert is_rel_projective(module).projective == projective
    assert is_rel_injective(module).injective == injective
    report = rel_injective_dimension(module)
    assert report.idim == idim and report.agrees
    assert report.algebraic_idim == idim


def test_failed_verdicts_carry_witnesses(t2):
    assert is_rel_projective(t2.modules["S1"]).witness is not None
    assert is_rel_injective(t2.modules["S2"]).witness is not None


def test_dual_of_regular_is_injective_over_t2():
    dual = dual_regular_module(upper_triangular(2))
    assert is_rel_injective(dual).injective


def test_resolution_of_s2_has_length_one(t2):
    res = rel_injective_resolution(t2.modules["S2"])
    assert res.length == 1 and not res.truncated and res.admissible


def test_semisimple_retraction_is_a_contractive_left_inverse():
    alg = build_semisimple([2, 3])
    module = random_module(alg, np.random.default_rng(0), 6, allow_zero=False)
    r, s, diag = semisimple_retraction(module, levels=2, samples=2)
    assert diag["rs_residual"] < 1e-10 and diag["equivariance"] < 1e-10
    assert diag["max_piece_cb"] <= 1 + 1e-6
    assert len(diag["pieces"]) == 5


def test_retraction_pieces_on_quotient_module_sample_the_image():
    from opmodules.sampling import random_quotient_module

    alg = build_semisimple([1, 2])
    module = random_quotient_module(alg, np.random.default_rng(3), 4)
    assert not module.space.exact_norms
    _, _, diag = semisimple_retraction(module, levels=2, samples=2)
    assert diag["rs_residual"] < 1e-10
    assert all(len(p.cb.per_level) == 2 for p in diag["pieces"])
    assert 0 < diag["max_piece_cb"] <= 1 + 1e-6


def test_semisimple_modules_are_injective_and_projective():
    alg = build_semisimple([1, 2])
    rng = np.random.default_rng(1)
    for _ in range(6):
        module = random_module(alg, rng, 8)
        assert is_rel_injective(module).injective and is_rel_projective(module).projective


@pytest.mark.parametrize("alg", [build_semisimple([2]), upper_triangular(2), upper_triangular(3)], ids=["M_2", "T_2", "T_3"])
def test_free_modules_over_spaces_are_projective(alg):
    rng = np.random.default_rng(2)
    space = concrete_space(rng.normal(size=(3, 2, 2)) + 1j * rng.normal(size=(3, 2, 2)))
    assert is_rel_projective(tensor_module(space, alg)).projective


def test_witness_for_t2_is_the_ideal_killing_the_corner():
    report = non_projective_witness(upper_triangular(2))
    # I = {x11 = 0} = span(E12, E22)
    assert report.ideal.shape == (3, 2)
    assert np.allclose(report.ideal[0], 0)
    assert not report.split.split and report.maximal
    assert report.quotient.dim == 1
    assert report.s_agree and report.s_two_sided


def test_witness_for_t3_exists():
    report = non_projective_witness(upper_triangular(3))
    assert not report.split.split and report.maximal


def test_witness_refused_on_semisimple_algebra():
    with pytest.raises(InputError):
        non_projective_witness(build_semisimple([2]))


def test_global_dimension_zero_verdicts():
    yes = global_dim_zero_certificate(build_semisimple([2]), count=6, max_dim=6)
    assert yes.zero and yes.agrees and yes.family_size == 6
    no = global_dim_zero_certificate(upper_triangular(2))
    assert not no.zero and no.witness is not None


def test_algebraic_dimension_over_scalars_is_zero():
    assert algebraic_injective_dimension(regular_module(build_semisimple([1]))) == 0
