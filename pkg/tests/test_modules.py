import numpy as np
import pytest

from opmodules import (
    ModMorphism,
    ModuleAxiomError,
    build_semisimple,
    canonical_embedding,
    classify,
    cokernel,
    concrete_module,
    direct_sum_module,
    kernel,
    make_module,
    make_morphism,
    pullback,
    pushout,
    quotient_module,
    regular_module,
    submodule,
    upper_triangular,
)
from opmodules.modules import generated_submodule, hom_basis, pullback_mediator, pushout_mediator
from opmodules.sampling import random_module, random_morphism

ALGEBRAS = {
    "C": lambda: build_semisimple([1]),
    "M_2": lambda: build_semisimple([2]),
    "M_2+M_3": lambda: build_semisimple([2, 3]),
    "T_2": lambda: upper_triangular(2),
}


@pytest.fixture(params=sorted(ALGEBRAS))
def algebra(request):
    return ALGEBRAS[request.param]()


def test_regular_module_passes_every_axiom(algebra):
    reg = regular_module(algebra)
    make_module(reg.space, algebra, reg.action)


def test_wrong_action_is_rejected_naming_the_identity():
    t2 = upper_triangular(2)
    reg = regular_module(t2)
    swapped = reg.action[[2, 1, 0]]
    unit_ok = np.tensordot(t2.unit_coords, swapped, axes=(0, 0))
    assert np.allclose(unit_ok, np.eye(3))
    with pytest.raises(ModuleAxiomError) as err:
        make_module(reg.space, t2, swapped)
    assert err.value.axiom == "associativity"


def test_unit_must_act_as_identity():
    alg = build_semisimple([2])
    reg = regular_module(alg)
    with pytest.raises(ModuleAxiomError) as err:
        make_module(reg.space, alg, 2 * reg.action)
    assert err.value.axiom in {"non-degenerate", "associativity"}


def test_row_vectors_over_m2():
    alg = build_semisimple([2])
    row = concrete_module(alg, np.array([[1.0, 0.0]]))
    assert row.dim == 2
    make_module(row.space, alg, row.action)
    assert len(hom_basis(row, regular_module(alg))) == 2


@pytest.mark.parametrize("name, expected", [("M_2", 4), ("T_2", 3), ("M_2+M_3", 13)])
def test_endomorphisms_of_regular_module_are_left_multiplications(name, expected):
    alg = ALGEBRAS[name]()
    assert len(hom_basis(regular_module(alg), regular_module(alg))) == expected


def test_kernel_and_cokernel_of_random_morphisms(algebra):
    rng = np.random.default_rng(11)
    for _ in range(5):
        e, f = random_module(algebra, rng, 6), random_module(algebra, rng, 6)
        g = random_morphism(e, f, rng)
        k, mu = kernel(g)
        c, pi = cokernel(g)
        assert k.dim + g.rank == e.dim and c.dim + g.rank == f.dim
        if mu.matrix.size and g.matrix.size:
            assert np.linalg.norm(g.matrix @ mu.matrix) < 1e-10
        if pi.matrix.size and g.matrix.size:
            assert np.linalg.norm(pi.matrix @ g.matrix) < 1e-10
        assert mu.equivariance_residual(full=True) < 1e-10
        assert pi.equivariance_residual(full=True) < 1e-10


def test_non_invariant_subspace_is_rejected():
    alg = build_semisimple([2])
    with pytest.raises(ModuleAxiomError):
        submodule(regular_module(alg), np.eye(4)[:, :1])


def test_generated_submodule_of_matrix_unit_is_a_row():
    alg = build_semisimple([2])
    assert generated_submodule(regular_module(alg), alg.coords(np.array([[1, 0], [0, 0]]))).shape[1] == 2


def test_pullback_and_pushout_universal_properties(algebra):
    rng = np.random.default_rng(12)
    g = random_module(algebra, rng, 5, allow_zero=False)
    e, f = random_module(algebra, rng, 5), random_module(algebra, rng, 5)
    a, b = random_morphism(e, g, rng), random_morphism(f, g, rng)
    sq = pullback(a, b)
    assert sq.commutes < 1e-10
    # any cone (x, y) through the diagonal of E (+) F factors
    x = random_module(algebra, rng, 4)
    t = random_morphism(x, sq.module, rng)
    u, res = pullback_mediator(sq, ModMorphism(x, e, sq.leg_left.matrix @ t.matrix), ModMorphism(x, f, sq.leg_right.matrix @ t.matrix))
    assert res < 1e-9 and np.allclose(u.matrix, t.matrix, atol=1e-8)

    c, d = random_morphism(g, e, rng), random_morphism(g, f, rng)
    po = pushout(c, d)
    assert po.commutes < 1e-10
    y = random_module(algebra, rng, 4)
    s = random_morphism(po.module, y, rng)
    w, res = pushout_mediator(po, ModMorphism(e, y, s.matrix @ po.leg_left.matrix), ModMorphism(f, y, s.matrix @ po.leg_right.matrix))
    assert res < 1e-9 and np.allclose(w.matrix, s.matrix, atol=1e-8)


def test_direct_sum_injections_and_projections(algebra):
    rng = np.random.default_rng(13)
    e, f = random_module(algebra, rng, 4), random_module(algebra, rng, 4)
    s = direct_sum_module(e, f)
    total = s.iota_left.matrix @ s.pi_left.matrix + s.iota_right.matrix @ s.pi_right.matrix
    assert np.allclose(total, np.eye(e.dim + f.dim))


def test_canonical_embedding_is_equivariant_and_isometric():
    rng = np.random.default_rng(14)
    alg = build_semisimple([2, 3])
    e = random_module(alg, rng, 6, allow_zero=False)
    hom, iota = canonical_embedding(e)
    assert iota.equivariance_residual(full=True) < 1e-10
    for n in (1, 2):
        x = e.space.random_element(rng, n)
        assert abs(hom.space.matrix_norm(x @ iota.matrix.T).value - e.space.matrix_norm(x).value) < 1e-6


def test_make_morphism_rejects_non_equivariant_maps():
    alg = build_semisimple([2])
    reg = regular_module(alg)
    transpose = np.eye(4)[[0, 2, 1, 3]]
    with pytest.raises(ModuleAxiomError):
        make_morphism(reg, reg, transpose)


def test_classify_flags_and_openness():
    alg = upper_triangular(2)
    reg = regular_module(alg)
    ideal = np.eye(3)[:, [1, 2]]
    quo, proj = quotient_module(reg, ideal[:, 1:])
    verdict = classify(proj)
    assert verdict.epi and verdict.cokernel_map and not verdict.mono
    assert verdict.openness_constant >= 1
