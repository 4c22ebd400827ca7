import csv
import json
import math
import subprocess
import sys

import pytest

from gpac.circuit import circuit_serialize, inverse_square_norm_circuit, sine_cosine_circuit
from gpac.cli import main, parse_grid, parse_params, parse_path
from gpac.pivp import pivp_deserialize


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def circuits(tmp_path):
    (tmp_path / "fig2.json").write_text(circuit_serialize(sine_cosine_circuit()))
    (tmp_path / "fig3.json").write_text(circuit_serialize(inverse_square_norm_circuit()))
    return tmp_path


def test_compile_then_eval(tmp_path, capsys):
    out = tmp_path / "f.json"
    code, _, _ = run(capsys, "compile", "-e", "sin(exp(t))", "-o", out)
    assert code == 0 and pivp_deserialize(out.read_text()).input_dim == 1
    code, text, _ = run(capsys, "eval", out, "--at", "1", "--tol", "1e-9")
    assert code == 0
    assert abs(float(text.strip()) - math.sin(math.e)) <= 1e-8


def test_circuit_then_simulate(circuits, capsys):
    pivp, traj = circuits / "out.json", circuits / "traj.csv"
    code, text, _ = run(capsys, "circuit", circuits / "fig2.json", "--to-pivp", pivp)
    assert code == 0 and "valid circuit" in text
    code, _, _ = run(capsys, "simulate", pivp, "--t1", "6.2832", "--out", traj)
    assert code == 0
    rows = list(csv.DictReader(traj.open()))
    assert float(rows[-1]["t"]) == 6.2832
    y1 = float(rows[-1]["y1"])
    # 6.2832 is a decimal rendering of 2 pi; the exact sine there is about 1.5e-5
    assert abs(y1 - math.sin(6.2832)) <= 1e-8
    assert abs(y1) <= 2e-5
    code, _, _ = run(capsys, "simulate", pivp, "--t1", repr(2 * math.pi), "--out", traj)
    assert abs(float(list(csv.DictReader(traj.open()))[-1]["y1"])) <= 1e-8


def test_simulate_dense_output(circuits, capsys):
    pivp = circuits / "out.json"
    run(capsys, "circuit", circuits / "fig2.json", "--to-pivp", pivp)
    code, text, _ = run(capsys, "simulate", pivp, "--t1", "3", "--dense", "31")
    assert code == 0
    rows = list(csv.DictReader(text.splitlines()))
    assert len(rows) == 31
    assert max(abs(float(r["y1"]) - math.sin(float(r["t"]))) for r in rows) <= 1e-9


def test_multidimensional_eval_needs_path(circuits, capsys):
    pivp = circuits / "fig3.pivp.json"
    run(capsys, "circuit", circuits / "fig3.json", "--to-pivp", pivp)
    code, text, _ = run(capsys, "eval", pivp, "--at", "-1,2", "--path", "1,1;-1,1")
    assert code == 0
    assert float(text.split(",")[0]) == pytest.approx(1 / 5, abs=1e-7)
    code, text, _ = run(capsys, "eval", pivp, "--at", "1,1", "--json")
    assert code == 2 and json.loads(text)["error"]["type"] == "DomainError"


def test_zoo_round_check(tmp_path, capsys):
    out = tmp_path / "rnd.csv"
    code, _, summary = run(capsys, "zoo", "rnd", "--params", "mu=5,lambda=4", "--grid",
                           "-3:3:0.01", "--check", "-o", out)
    assert code == 0 and "0 violations" in summary
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 601 and all(r["pass"] == "pass" for r in rows)


def test_zoo_compiled_column(capsys):
    code, text, _ = run(capsys, "zoo", "sg", "--params", "mu=2,lambda=2", "--grid",
                        "-1:1:0.25", "--compiled")
    assert code == 0
    rows = list(csv.DictReader(text.splitlines()))
    assert len(rows) == 9
    # the sign is approximated within e^-mu once |x| >= 1/lambda
    far = [r for r in rows if abs(float(r["x"])) >= 0.5]
    assert all(abs(float(r["compiled"]) - math.copysign(1, float(r["x"]))) <= math.exp(-2)
               for r in far)
    assert all(abs(float(r["compiled"]) - float(r["reference"])) <= 1e-9 for r in rows)


def test_zoo_list_and_unknown(capsys):
    code, text, _ = run(capsys, "zoo", "list")
    assert code == 0 and "rnd" in text and "clamp" in text
    code, _, err = run(capsys, "zoo", "nosuch")
    assert code == 2 and "nosuch" in err


def test_check_bound(tmp_path, capsys):
    code, text, _ = run(capsys, "check-bound", "-e", "sin(t)*tanh(t)", "--grid", "-3:3:0.5")
    assert code == 0 and "ok" in text
    code, text, _ = run(capsys, "check-bound", "-e", "exp(t)", "--grid", "0:2:0.5", "--json")
    report = json.loads(text)
    assert report["ok"] and report["max_ratio"] == pytest.approx(1, rel=1e-6)


def test_explain(capsys):
    code, text, _ = run(capsys, "explain", "-e", "sin(t)+cos(t)")
    assert code == 0
    assert "n=5" in text and "validation: ok" in text and "combine" in text
    code, text, _ = run(capsys, "explain", "-e", "tanh(t)", "--json")
    assert json.loads(text)["n"] == 1


def test_errors_are_reported(tmp_path, capsys):
    code, text, _ = run(capsys, "eval", "-e", "sg(x1, 5, 2*", "--at", "1", "--json")
    err = json.loads(text)["error"]
    assert code == 2 and err["column"] == 13 and err["type"] == "ExprError"
    code, _, err = run(capsys, "eval", "-e", "1/t", "--at", "1")
    assert code == 2 and "vanishes" in err
    code, _, err = run(capsys, "eval", tmp_path / "missing.json", "--at", "1")
    assert code == 2 and err.startswith("error:")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    code, text, _ = run(capsys, "explain", bad, "--json")
    assert code == 2 and "error" in json.loads(text)


def test_base_option(capsys):
    code, text, _ = run(capsys, "eval", "-e", "ln(t)", "--base", "1", "--at", "2")
    assert code == 0 and float(text) == pytest.approx(math.log(2), abs=1e-9)


def test_negative_values_parse(capsys):
    code, text, _ = run(capsys, "eval", "-e", "sin(t)", "--at", "-1.5")
    assert code == 0 and float(text) == pytest.approx(math.sin(-1.5), abs=1e-9)


def test_argument_parsers():
    assert parse_path("1,1;-1,1") == [[1.0, 1.0], [-1.0, 1.0]]
    assert parse_params("mu=5,lambda=4") == {"mu": 5.0, "lambda": 4.0}
    assert len(parse_grid("-3:3:0.01")) == 601


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "gpac", "eval", "-e", "arctan(t)", "--at", "1"],
                         capture_output=True, text=True, cwd=tmp_path)
    assert res.returncode == 0
    assert float(res.stdout) == pytest.approx(math.pi / 4, abs=1e-9)
