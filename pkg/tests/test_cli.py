import json

import numpy as np
import pytest

from opmodules.cli import main
from opmodules.definitions import FIXTURES, dump_definitions, fixture_path, load_fixture, parse_definition_file, parse_definition_text
from opmodules.errors import DefinitionError

NON_ASSOCIATIVE = """\
algebras:
  T: {kind: upper-triangular, n: 2}
modules:
  bad:
    construction: explicit
    algebra: T
    basis: [[[1, 0]]]
    action: [[[1]], [[1]], [[0]]]
"""


def run(argv, capsysbinary):
    code = main(argv)
    out = capsysbinary.readouterr()
    return code, out.out.decode(), out.err.decode()


def test_semisimple_fixture_has_blocks():
    defs = load_fixture("semisimple_2_3")
    alg = defs.algebras[defs.default]
    assert alg.blocks is not None and tuple(alg.blocks.sizes) == (2, 3)


def test_t2_fixture_has_no_blocks():
    defs = load_fixture("t2")
    alg = defs.algebras[defs.default]
    assert alg.blocks is None and alg.dim == 3


def test_non_associative_action_names_the_identity():
    with pytest.raises(DefinitionError, match="associativity"):
        parse_definition_text(NON_ASSOCIATIVE)


def test_yaml_errors_report_a_line():
    with pytest.raises(DefinitionError, match=r":2:\d+"):
        parse_definition_text("algebras: {A: {kind: full, n: 2}\nmodules: [")


def test_unresolved_reference():
    with pytest.raises(DefinitionError, match="nope"):
        parse_definition_text("algebras:\n  A: {kind: full, n: 2}\nmodules:\n  S: {construction: hom, of: nope}\n")


@pytest.mark.parametrize("name", FIXTURES)
def test_fixtures_round_trip(name):
    defs = parse_definition_file(fixture_path(name))
    again = parse_definition_text(dump_definitions(defs))
    assert sorted(again.algebras) == sorted(defs.algebras)
    assert sorted(again.modules) == sorted(defs.modules)
    for key, module in defs.modules.items():
        assert np.allclose(again.modules[key].action, module.action)
    for key, alg in defs.algebras.items():
        assert np.allclose(again.algebras[key].structure, alg.structure)


def test_gldim_zero_t2_is_no_with_witness(capsysbinary):
    code, out, _ = run(["gldim-zero", "t2"], capsysbinary)
    assert code == 0
    assert "verdict answer: NO" in out
    assert "ideal" in out and "witness" in out


def test_gldim_zero_semisimple_lists_idim_zero(capsysbinary):
    code, out, _ = run(["gldim-zero", "M_2", "--samples", "4"], capsysbinary)
    assert "verdict answer: YES" in out
    assert out.count("idim 0") == 4


def test_check_axioms_semisimple_passes(capsysbinary):
    code, out, _ = run(["check-axioms", "semisimple_2_3", "--structure", "max", "--samples", "5", "--seed", "7", "--format", "json"], capsysbinary)
    report = json.loads(out)
    assert code == 0 and report["verdicts"]["passed"] is True


def test_split_t2_pair(capsysbinary):
    _, out, _ = run(["split", "--pair", "t2_I_pair", "--format", "json"], capsysbinary)
    verdicts = json.loads(out)["verdicts"]
    assert verdicts["E_rel"] is True and verdicts["E_min"] is False


def test_json_reports_replay_byte_for_byte(capsysbinary):
    argv = ["dimension", "t2:S2", "--format", "json", "--seed", "3"]
    first = run(argv, capsysbinary)[1]
    second = run(argv, capsysbinary)[1]
    assert first == second and "wall" not in first


def test_unknown_name_is_an_error(capsysbinary):
    code, _, err = run(["projective", "no_such_module"], capsysbinary)
    assert code == 2 and "no_such_module" in err


def test_definition_file_option(tmp_path, capsysbinary):
    path = tmp_path / "defs.yaml"
    path.write_text("algebras:\n  D: {kind: diagonal, n: 2}\nmodules:\n  R: {construction: regular}\n")
    code, out, _ = run(["injective", "R", "--defs", str(path)], capsysbinary)
    assert code == 0 and "verdict injective: True" in out
