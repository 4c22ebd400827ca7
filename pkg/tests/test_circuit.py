import json
import math

import numpy as np
import pytest

from gpac.circuit import (Circuit, CircuitError, Unit, adder, circuit_deserialize,
                          circuit_from_json, circuit_serialize, circuit_to_json, circuit_to_pivp,
                          circuit_validate, constant, integrator, inverse_square_norm_circuit,
                          multiplier, pivp_to_circuit, same_system, sine_cosine_circuit, wire)
from gpac.pivp import builtin
from gpac.polynomial import PolyMatrix, Polynomial
from gpac.simulator import evaluate, integrate
from conftest import random_pivp


def test_sine_circuit_is_valid():
    assert circuit_validate(sine_cosine_circuit()) == []


def test_algebraic_cycle_detected():
    c = Circuit((adder("a"),), (wire("a", "a.u"), wire("t", "a.v")), ("t",), ("a",))
    assert any("algebraic cycle" in p for p in circuit_validate(c))


def test_missing_initial_value_detected():
    c = Circuit((Unit("i", "integrator"),), (wire("i", "i.u1"), wire("t", "i.v1")),
                ("t",), ("i",))
    assert any("initial value" in p for p in circuit_validate(c))


@pytest.mark.parametrize("wires,needle", [
    ((wire("one", "h.u1"),), "h.v1"),
    ((wire("one", "h.u1"), wire("t", "h.v1"), wire("t", "h.v1")), "h.v1"),
    ((wire("one", "h.u1"), wire("t", "h.v1"), wire("one", "h.w")), "no port"),
    ((wire("one", "h.u1"), wire("t", "h.v1"), wire("nowhere", "m.u")), "unknown"),
    ((wire("one", "h.u1"), wire("one", "h.v1")), "differential port"),
])
def test_structural_violations(wires, needle):
    c = Circuit((constant("one", 1), integrator("h", 0), multiplier("m")), wires, ("t",), ("h",))
    problems = circuit_validate(c)
    assert problems and any(needle in p for p in problems), problems


def test_invalid_circuit_does_not_compile():
    c = Circuit((adder("a"),), (wire("a", "a.u"), wire("t", "a.v")), ("t",), ("a",))
    with pytest.raises(CircuitError):
        circuit_to_pivp(c)


def test_sine_circuit_compiles_to_the_sine_system():
    f = circuit_to_pivp(sine_cosine_circuit())
    y, z = Polynomial.variable(0, 2), Polynomial.variable(1, 2)
    assert f.rhs.col(0) == [z, -y]
    assert [float(v) for v in f.y0] == [0, 1]
    assert same_system(f, builtin("sin"))


def test_sine_circuit_simulates_sine():
    f = circuit_to_pivp(sine_cosine_circuit())
    ts, ys = integrate(f, 2 * math.pi, 1e-10).dense(100)
    assert np.max(np.abs(ys[:, 0] - np.sin(ts))) <= 1e-9


def test_inverse_square_norm_matrix():
    f = circuit_to_pivp(inverse_square_norm_circuit())
    h1, h2, h3 = (Polynomial.variable(i, 3) for i in range(3))
    one, zero = Polynomial.constant(1, 3), Polynomial.zero(3)
    assert f.rhs.row(0) == (-2 * h1**2 * h2, -2 * h1**2 * h3)
    assert f.rhs.row(1) == (one, zero)
    assert f.rhs.row(2) == (zero, one)
    assert evaluate(f, [1, 1], path=[[1, 1]])[0] == pytest.approx(0.5, abs=1e-9)


def test_single_integrator_is_identity():
    c = Circuit((constant("one", 1), integrator("h", 0)),
                (wire("one", "h.u1"), wire("t", "h.v1")), ("t",), ("h",))
    f = circuit_to_pivp(c)
    assert same_system(f, builtin("id"))


def test_adder_output_eliminated():
    # outputs t + t^2 / 2 through an adder of two integrators
    c = Circuit((constant("one", 1), integrator("a", 0), integrator("b", 0), adder("s")),
                (wire("one", "a.u1"), wire("t", "a.v1"), wire("a", "b.u1"), wire("t", "b.v1"),
                 wire("a", "s.u"), wire("b", "s.v")), ("t",), ("s",))
    f = circuit_to_pivp(c)
    assert integrate(f, 2.0, 1e-12).final[0] == pytest.approx(4.0, abs=1e-11)


def test_exp_expands_to_one_integrator():
    c = pivp_to_circuit(builtin("exp"))
    assert c.counts() == {"constant": 0, "adder": 0, "multiplier": 0, "integrator": 1}
    assert wire("s000", "s000.u1") in c.wires


def test_sine_expands_to_the_sine_circuit_shape():
    c = pivp_to_circuit(builtin("sin"))
    assert c.counts() == sine_cosine_circuit().counts()
    assert same_system(circuit_to_pivp(c), builtin("sin"))


def test_random_pivps_survive_circuit_round_trip():
    rng = np.random.default_rng(11)
    for _ in range(20):
        f = random_pivp(rng)
        c = pivp_to_circuit(f)
        assert circuit_validate(c) == []
        assert same_system(circuit_to_pivp(c), f)


def test_builtin_round_trips():
    for name in ("sin", "cos", "tanh", "arctan", "exp"):
        f = builtin(name)
        assert same_system(circuit_to_pivp(pivp_to_circuit(f)), f)


def test_json_round_trip():
    for c in (sine_cosine_circuit(), inverse_square_norm_circuit()):
        text = circuit_serialize(c)
        assert circuit_deserialize(text) == c
        assert circuit_from_json(json.loads(text)) == c
        assert circuit_to_json(circuit_deserialize(text)) == json.loads(text)


def test_malformed_documents():
    with pytest.raises(CircuitError):
        circuit_deserialize("{")
    doc = circuit_to_json(sine_cosine_circuit())
    del doc["units"]
    with pytest.raises(CircuitError):
        circuit_from_json(doc)
    with pytest.raises(CircuitError):
        wire("a", "nodot")


def test_same_system_with_permutation():
    s = builtin("sin")
    assert not same_system(s, builtin("cos"))
    c, si = Polynomial.variable(0, 2), Polynomial.variable(1, 2)
    reordered = s.with_(rhs=PolyMatrix.column([-si, c]), y0=(1, 0))
    assert not same_system(s, reordered)
    assert same_system(s, reordered, [1, 0])
