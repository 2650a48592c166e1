import numpy as np
import pytest

from opmodules import (
    KernelCokernelPair,
    NotAdmissibleError,
    admissible_factorization,
    axiom_suite,
    build_semisimple,
    classify_pair,
    is_kernel_cokernel_pair,
    regular_module,
    split_linear,
    split_module,
    upper_triangular,
)
from opmodules.definitions import load_fixture
from opmodules.exact import pair_from_epi, pair_from_mono, solve_quintuplet, solve_retraction, solve_section
from opmodules.sampling import random_module, random_morphism, random_pair


def t2_pair(name):
    return load_fixture("t2").pairs[name]


def test_simple_top_pair_is_relatively_but_not_module_split():
    m = classify_pair(t2_pair("t2_I_pair"))
    assert m.flags == (False, True, True)
    assert m.module_split.witness is not None


def test_projective_simple_pair_splits():
    assert classify_pair(t2_pair("t2_Iprime_pair")).flags == (True, True, True)


def test_infeasibility_witness_certifies_no_retraction():
    from opmodules.exact import retraction_system

    pair = t2_pair("t2_I_pair")
    a, b = retraction_system(pair)
    _, sol = solve_retraction(pair)
    y = sol.witness
    assert np.linalg.norm(y.conj() @ a) < 1e-10
    assert abs(np.vdot(y, b)) > 1e-3


def test_non_pair_is_rejected():
    alg = upper_triangular(2)
    reg = regular_module(alg)
    check = is_kernel_cokernel_pair(reg.identity, reg.identity)
    assert not check.ok and "reason" in check.diagnostics


@pytest.mark.parametrize("sizes", [[1], [2], [2, 3]])
def test_every_pair_splits_over_semisimple_algebras(sizes):
    alg = build_semisimple(sizes)
    rng = np.random.default_rng(len(sizes))
    for _ in range(8):
        assert classify_pair(random_pair(alg, rng, 6)).flags == (True, True, True)


def test_split_solvers_agree_on_t2():
    alg = upper_triangular(2)
    rng = np.random.default_rng(1)
    outcomes = set()
    for _ in range(30):
        pair = random_pair(alg, rng, 6)
        found = (solve_retraction(pair)[0] is not None, solve_section(pair)[0] is not None, solve_quintuplet(pair)[0] is not None)
        assert len(set(found)) == 1
        outcomes.add(found[0])
    assert outcomes == {True, False}


def test_module_split_certificate_is_a_direct_sum():
    alg = build_semisimple([2, 3])
    rng = np.random.default_rng(2)
    cert = split_module(random_pair(alg, rng, 8))
    assert cert.split
    assert max(cert.residuals.values()) < 1e-9


def test_linear_split_always_exists_at_finite_dimension():
    alg = upper_triangular(2)
    rng = np.random.default_rng(3)
    for _ in range(10):
        cert = split_linear(random_pair(alg, rng, 6))
        assert cert.kind == "linear-split"


def test_pair_constructors_are_mutually_consistent():
    alg = upper_triangular(2)
    rng = np.random.default_rng(4)
    pair = random_pair(alg, rng, 6)
    again = pair_from_mono(pair.mu)
    assert np.linalg.matrix_rank(again.pi.matrix) == pair.quotient.dim
    again = pair_from_epi(pair.pi)
    assert again.sub.dim == pair.sub.dim


def test_admissible_factorization_of_random_morphism():
    alg = build_semisimple([2])
    rng = np.random.default_rng(5)
    e, f = random_module(alg, rng, 6, False), random_module(alg, rng, 6, False)
    g = random_morphism(e, f, rng)
    fac = admissible_factorization(g, "min")
    assert fac.residual < 1e-9
    assert np.allclose(fac.mono.matrix @ fac.epi.matrix, g.matrix, atol=1e-9)


def test_non_split_quotient_map_is_not_admissible_in_e_min():
    pi = t2_pair("t2_I_pair").pi
    with pytest.raises(NotAdmissibleError):
        admissible_factorization(pi, "min")
    assert admissible_factorization(pi, "rel").residual < 1e-9


@pytest.mark.parametrize("structure", ["min", "rel", "max"])
def test_axiom_suite_smoke(structure):
    report = axiom_suite(upper_triangular(2), structure, samples=4, seed=3)
    assert report.passed, {k: v.failing_seeds for k, v in report.tallies.items()}


def test_axiom_suite_replays_deterministically():
    a = axiom_suite(build_semisimple([2]), "rel", samples=3, seed=9)
    b = axiom_suite(build_semisimple([2]), "rel", samples=3, seed=9)
    assert {k: (t.passed, t.max_residual) for k, t in a.tallies.items()} == {
        k: (t.passed, t.max_residual) for k, t in b.tallies.items()
    }
