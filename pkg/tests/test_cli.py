import json
import subprocess
import sys
from fractions import Fraction

import pytest

from conekit.cli import main

NOR1 = "inputs 2\ngate g1 NOR y1 y2\noutput g1\n"
PATH3 = """inputs 3
advice 101
gate b12 AND y1 y2
gate e12 AND x1 b12
gate ok12 NOT e12
gate b13 AND y1 y3
gate e13 AND x2 b13
gate ok13 NOT e13
gate b23 AND y2 y3
gate e23 AND x3 b23
gate ok23 NOT e23
gate a1 AND ok12 ok13
gate a2 AND a1 ok23
output a2
"""


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_slack_cor2_exact(capsys):
    code, out, _ = run(capsys, "slack", "--polytope", "cor2", "--exact")
    assert code == 0
    obj = json.loads(out)
    data = obj["slack"]["data"]
    rows = sorted(tuple(Fraction(str(v)) for v in row) for row in data)
    assert rows == sorted([(0, 0, 0, 1), (0, 1, 0, 0), (0, 0, 1, 0), (1, 0, 0, 0)])


def test_slack_text_and_vertices_file(tmp_path, capsys):
    p = tmp_path / "sq.json"
    p.write_text(json.dumps({"dim": 1, "vertices": [[0], [1]]}))
    code, out, _ = run(capsys, "slack", "--vertices", str(p), "--format", "text")
    assert code == 0 and len(out.strip().splitlines()) == 2


def test_global_flags_before_verb(capsys):
    code, out, _ = run(capsys, "--exact", "slack", "--polytope", "cor1")
    assert code == 0 and json.loads(out)["slack"]["data"]


def test_compile_verify(tmp_path, capsys):
    p = tmp_path / "nor1.nor"
    p.write_text(NOR1)
    code, out, err = run(capsys, "compile-circuit", str(p), "--verify")
    assert code == 0
    obj = json.loads(out)
    assert obj["verify"] == "PASS" and obj["face_projection"] == [[0, 0]]
    assert "PASS" in err


def test_compile_text_prints_pass(tmp_path, capsys):
    p = tmp_path / "nor1.nor"
    p.write_text(NOR1)
    code, out, _ = run(capsys, "compile-circuit", str(p), "--verify", "--format", "text")
    assert code == 0 and out.strip().splitlines()[-1] == "PASS"


def test_compile_cp_extend_path(tmp_path, capsys):
    p = tmp_path / "path.nor"
    p.write_text(PATH3)
    code, out, _ = run(capsys, "compile-circuit", str(p), "--verify", "--cp-extend")
    assert code == 0
    obj = json.loads(out)
    assert sorted(obj["vertex_set"]) == sorted([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1]])
    assert obj["cp_extension_check"]["mismatches"] == []


def test_compile_constant_output_is_module_error(tmp_path, capsys):
    p = tmp_path / "c.nor"
    p.write_text("inputs 1\ngate g1 NOR c1 c1\noutput g1\n")
    code, out, _ = run(capsys, "compile-circuit", str(p))
    assert code == 1 and json.loads(out)["status"] == "error"


def test_capacity_orthant(capsys):
    code, out, _ = run(capsys, "capacity", "--cone", "orthant", "--dim", "2", "--restarts", "1", "--seed", "0")
    obj = json.loads(out)
    assert code == 0 and obj["capacity_lower"] == 1.0 and obj["bound"] == 1.0


def test_decompose(tmp_path, capsys):
    m = {
        "system": {"kind": "orthant", "ambient": 2},
        "effects": [
            {"rows": 2, "cols": 1, "data": ["1/2", "0"]},
            {"rows": 2, "cols": 1, "data": ["0", "1/2"]},
            {"rows": 2, "cols": 1, "data": ["1/2", "1/2"]},
        ],
    }
    p = tmp_path / "m.json"
    p.write_text(json.dumps(m))
    code, out, _ = run(capsys, "decompose-measurement", str(p), "--exact")
    assert code == 0, out
    obj = json.loads(out)
    assert obj["outcome_map"] == [0, 1, 2, 2]
    assert [part["weight"] for part in obj["parts"]] == ["1/2", "1/2"]
    assert obj["max_nonzero"] <= 2


def test_simulate_and_verify_trivial(tmp_path, capsys):
    fz = {
        "cone": {"kind": "orthant", "ambient": 2},
        "states": [{"rows": 2, "cols": 1, "data": ["0", "1"]}, {"rows": 2, "cols": 1, "data": ["1", "0"]}],
        "responses": [{"rows": 2, "cols": 1, "data": ["1", "0"]}, {"rows": 2, "cols": 1, "data": ["0", "1"]}],
    }
    p = tmp_path / "f.json"
    p.write_text(json.dumps(fz))
    code, out, _ = run(capsys, "simulate", "--factorization", str(p), "--samples", "1000", "--seed", "3", "--exact")
    assert code == 0
    obj = json.loads(out)
    assert obj["expectation"]["data"] == [[0, 1], [1, 0]]
    assert obj["expectation_max_error"] == 0
    code, out, _ = run(capsys, "verify-factorization", "--factorization", str(p))
    assert code == 0 and json.loads(out)["max_abs_err"] == 0


def test_verify_failure_names_invariant(tmp_path, capsys):
    fz = {
        "cone": {"kind": "orthant", "ambient": 2},
        "states": [{"rows": 2, "cols": 1, "data": ["1", "0"]}],
        "responses": [{"rows": 2, "cols": 1, "data": ["1", "0"]}],
    }
    p = tmp_path / "f.json"
    p.write_text(json.dumps(fz))
    m = tmp_path / "m.json"
    m.write_text(json.dumps({"rows": 1, "cols": 1, "data": [["2"]]}))
    code, out, _ = run(capsys, "verify-factorization", "--factorization", str(p), "--matrix", str(m))
    obj = json.loads(out)
    assert code == 1 and obj["status"] == "fail" and obj["invariant"]


def test_factorize_and_reuse(tmp_path, capsys):
    cert = tmp_path / "cert.json"
    code, out, _ = run(capsys, "factorize-cor", "--n", "2", "--out", str(cert))
    assert code == 0
    obj = json.loads(cert.read_text())
    assert max(obj["objective_gaps"]) <= 1e-6 and obj["max_abs_err"] <= 1e-5
    code, out, _ = run(capsys, "verify-factorization", "--factorization", str(cert), "--polytope", "cor2")
    assert code == 0
    code, out, _ = run(capsys, "simulate", "--factorization", str(cert), "--samples", "20000", "--seed", "3")
    assert code == 0 and json.loads(out)["expectation_max_error"] <= 1e-5


def test_cp_extend(capsys):
    code, out, _ = run(capsys, "cp-extend", "--n", "2")
    obj = json.loads(out)
    assert code == 0 and len(obj["constraints"]) == 7 and obj["proper"] is False
    assert all(c["feasible"] and c["projects_to_vertex"] for c in obj["vertex_checks"])


def test_idempotent_output(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["capacity", "--cone", "orthant", "--dim", "3", "--restarts", "2", "--iters", "30", "--seed", "7", "--out", str(p)]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("argv", [["frobnicate"], ["slack", "--bogus"], ["capacity", "--cone", "cube", "--dim", "2"]])
def test_usage_errors_exit_2(argv):
    proc = subprocess.run([sys.executable, "-m", "conekit.cli", *argv], capture_output=True, text=True)
    assert proc.returncode == 2
    assert "usage" in proc.stderr
