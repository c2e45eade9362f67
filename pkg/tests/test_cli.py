import io
import json
import subprocess
import sys

import pytest

from todabracket.cli import (EXIT_MATH, EXIT_OK, EXIT_VALIDATION, EXIT_WINDOW, bundled_workspaces,
                             dump_result, load_result, load_workspace, run)


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code, rep = run(list(argv), stdout=out, stderr=err)
    return code, rep, out.getvalue(), err.getvalue()


def write(tmp_path, text, name="ws.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_bundled_workspaces_listed():
    assert {"heisenberg", "formal", "dual", "ko", "bz2", "massey4"} <= set(bundled_workspaces())
    for name in bundled_workspaces():
        load_workspace(name)


def test_verify_theorem_heisenberg():
    code, rep, out, _ = call("verify_theorem", "heisenberg")
    assert code == EXIT_OK
    assert rep.verdict == "EQUAL, class nonzero"
    assert out.startswith("verify_theorem on bundled:heisenberg: EQUAL, class nonzero")


def test_massey_formal():
    code, rep, _, _ = call("massey", "formal")
    assert code == EXIT_OK
    assert rep.verdict == "0 ∈ bracket, indeterminacy 0"


def test_catcoh_bz2():
    code, rep, out, _ = call("catcoh", "bz2", "--degree", "3")
    assert code == EXIT_OK
    assert rep.verdict == "Z/2"


def test_massey_heisenberg_agrees_with_formula():
    code, rep, _, _ = call("massey", "heisenberg", "--format", "machine")
    r = rep.data["results"]
    assert r["value_text"] == "[yz]" and r["indeterminacy_dim"] == 0
    assert r["oracle"]["agrees"]


def test_ko_indeterminacy():
    code, rep, _, _ = call("massey", "ko")
    assert code == EXIT_OK and rep.verdict.endswith("indeterminacy 0")


@pytest.mark.parametrize("verb", ["cohomology", "transfer", "massey", "universal_class", "cup",
                                  "obstruction", "verify_theorem"])
def test_every_verb_on_heisenberg(verb):
    code, rep, out, err = call(verb, "heisenberg")
    assert code == EXIT_OK, err
    assert out.splitlines()[0].startswith(verb + " on bundled:heisenberg")


def test_machine_round_trip(tmp_path):
    f = tmp_path / "r.json"
    code, rep, out, _ = call("cup", "heisenberg", "--format", "machine", "--out", str(f))
    assert out == f.read_text() == dump_result(rep.data)
    data = load_result(out)
    assert data == json.loads(json.dumps(rep.data))
    assert dump_result(data) == out
    assert data["results"]["class"] == [0, 0, 1, 0, 0, 0, 0, 1]


@pytest.mark.parametrize("verb", ["cup", "obstruction", "transfer", "universal_class"])
def test_cache_matches_cold(tmp_path, verb):
    cold = tmp_path / "cold.json"
    call(verb, "heisenberg", "--out", str(cold))
    cache = str(tmp_path / "cache")
    first = tmp_path / "first.json"
    second = tmp_path / "second.json"
    call(verb, "heisenberg", "--cache", cache, "--out", str(first))
    call(verb, "heisenberg", "--cache", cache, "--out", str(second))
    assert cold.read_bytes() == first.read_bytes() == second.read_bytes()


def test_seeded_runs_are_identical(tmp_path):
    outs = []
    for i in range(2):
        f = tmp_path / ("r%d.json" % i)
        call("verify_theorem", "heisenberg", "--seed", "17", "--out", str(f))
        outs.append(f.read_bytes())
    assert outs[0] == outs[1]
    data = json.loads(outs[0])
    assert data["arguments"]["seed"] == 17


# -- exit codes

BAD_GENERATOR = """format: 1
characteristic: 2
dgas:
  a:
    exterior:
      generators: {x: 1}
      differential:
        x: [[1, [q]]]
"""


def test_validation_error_has_field_and_line(tmp_path):
    code, rep, out, err = call("cohomology", write(tmp_path, BAD_GENERATOR), "--target", "a")
    assert code == EXIT_VALIDATION and rep is None
    assert "dgas.a.differential.x" in err and "line 8" in err


def test_unknown_name_is_validation_error():
    code, _, _, err = call("massey", "heisenberg", "--complex", "nope")
    assert code == EXIT_VALIDATION and "nope" in err


def test_bad_arguments():
    assert call("fly", "heisenberg")[0] == EXIT_VALIDATION
    assert call("transfer", "heisenberg", "--max-order", "2")[0] == EXIT_VALIDATION
    assert call("cohomology", "no/such/file.yaml")[0] == EXIT_VALIDATION
    assert call("cohomology", "heisenberg", "--window", "5..1")[0] == EXIT_VALIDATION


def test_invariants_reverified_on_load(tmp_path):
    text = """format: 1
characteristic: 2
dgas:
  a:
    table:
      labels: ["1", u, v]
      degrees: [0, 1, 2]
      products: {u: {u: v}}
      differential: {u: v}
"""
    code, _, _, err = call("cohomology", write(tmp_path, text), "--target", "a")
    assert code == EXIT_VALIDATION


COMPOSITE = """format: 1
characteristic: 2
dgas:
  heis:
    builtin: heisenberg
complexes:
  bad: {over: heis, elements: ["x", "[yz]", "y"]}
"""


def test_math_failure_exit(tmp_path):
    code, rep, _, err = call("massey", write(tmp_path, COMPOSITE), "--complex", "bad")
    assert code == EXIT_MATH and "CompositeNonzero" in err


LAURENT = """format: 1
characteristic: 2
window: -2..2
rings:
  L: {laurent: {degree: 2, var: u}}
modules:
  f: {over: L, free: [0]}
"""


def test_window_exhausted_exit(tmp_path):
    path = write(tmp_path, LAURENT)
    code, rep, _, err = call("cohomology", path, "--target", "f")
    assert code == EXIT_WINDOW and "window" in err
    code, rep, _, _ = call("cohomology", path, "--target", "f", "--window=-12..12")
    assert code == EXIT_OK
    ext = rep.data["results"]["ext_dims"]
    assert ext["0"] == {str(t): 1 for t in range(-12, 13, 2)}
    assert ext["1"] == ext["2"] == ext["3"] == {}


def test_inhomogeneous_relation_rejected(tmp_path):
    text = LAURENT.replace("free: [0]", 'quotient: {generators: [0], relations: ["u + 1"]}')
    code, _, _, err = call("cohomology", write(tmp_path, text), "--target", "f")
    assert code == EXIT_VALIDATION and "homogeneous" in err


TRUNCATED = """format: 1
characteristic: 2
rings:
  P:
    table:
      labels: ["1", x, xx, xxx]
      degrees: [0, 1, 2, 3]
      products:
        - [x, x, {xx: 1}]
        - [x, xx, {xxx: 1}]
        - [xx, x, {xxx: 1}]
modules:
  k: {over: P, residue: 0}
"""


def test_ext_of_residue_field_over_truncated_polynomials(tmp_path):
    # F_2[x]/x^4 with |x| = 1: Ext^s(k, k) is one-dimensional, in t = -1, -4, -5, ...
    code, rep, _, _ = call("cohomology", write(tmp_path, TRUNCATED), "--target", "k")
    assert code == EXIT_OK
    assert rep.data["results"]["ext_dims"] == {"0": {"0": 1}, "1": {"-1": 1},
                                                "2": {"-4": 1}, "3": {"-5": 1}}


def test_console_script_runs():
    r = subprocess.run([sys.executable, "-m", "todabracket", "catcoh", "bz2", "--degree", "3",
                        "--format", "machine"], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["verdict"] == "Z/2"
