import json
from fractions import Fraction

import numpy as np
import pytest

from gpac.pivp import (BUILTIN_NAMES, PIVP, DomainDecl, PIVPFormatError, builtin, exp_tower,
                       pivp_deserialize, pivp_from_json, pivp_serialize, pivp_to_json,
                       pivp_validate)
from gpac.polynomial import Coefficient, PolyMatrix, Polynomial
from gpac.simulator import check_bound, integrate
from conftest import random_pivp


def _all_builtins():
    for name in BUILTIN_NAMES:
        param = {"const": Fraction(3, 2), "inv": Fraction(1, 10), "ln": Fraction(1, 10)}
        yield name, builtin(name, param.get(name))


def test_sine_system_is_valid():
    assert pivp_validate(builtin("sin")) == []


def test_arity_violation():
    y = Polynomial.variable(0, 3)
    f = PIVP(PolyMatrix.column([y, y]), (0,), (0, 1))
    assert any("arity" in v for v in pivp_validate(f))


def test_domain_violation():
    f = PIVP(builtin("sin").rhs, (5,), (0, 1), domain=DomainDecl.box([0], [1]))
    assert any("domain" in v for v in pivp_validate(f))


def test_builtin_shapes():
    t = builtin("tanh")
    y = Polynomial.variable(0, 1)
    assert t.state_dim == 1 and t.rhs.col(0) == [1 - y**2]
    assert [float(v) for v in t.y0] == [0] and t.bound(7.0) == 1

    at = builtin("arctan")
    y1, y2, y3 = (Polynomial.variable(i, 3) for i in range(3))
    assert at.rhs.col(0) == [y2, -2 * y3 * y2**2, Polynomial.constant(1, 3)]
    assert [float(v) for v in at.y0] == [0, 1, 0]

    inv = builtin("inv", Fraction(1, 10))
    assert inv.rhs.col(0) == [-y**2]
    assert [float(v) for v in inv.x0] == [1] and inv.bound(3.0) == 10
    with pytest.raises(ValueError):
        builtin("inv")
    with pytest.raises(ValueError):
        builtin("sqrt")


def test_poly_flag_exactly_for_the_polynomial_builtins():
    flags = {name: f.is_poly for name, f in _all_builtins()}
    assert flags.pop("exp") is False
    assert all(flags.values())


@pytest.mark.parametrize("name,f", list(_all_builtins()))
def test_builtins_validate_and_respect_bound(name, f):
    assert pivp_validate(f) == []
    lo = -10 if f.domain.contains([-10.0]) else 0.11
    hi = 3 if name == "exp" else 10
    report = check_bound(f, lo, hi, tol=1e-11, samples=201)
    assert report.ok, report.summary()


@pytest.mark.parametrize("name,ref", [("exp", np.exp), ("sin", np.sin), ("cos", np.cos),
                                      ("tanh", np.tanh), ("arctan", np.arctan)])
def test_builtins_match_reference_functions(name, ref):
    traj = integrate(builtin(name), 2.5, 1e-12)
    ts = np.linspace(0, 2.5, 40)
    assert np.allclose(traj(ts)[:, 0], ref(ts), atol=1e-10, rtol=1e-10)


def test_inverse_and_log_match_reference():
    for name, ref in (("inv", lambda t: 1 / t), ("ln", np.log)):
        f = builtin(name, Fraction(1, 10))
        traj = integrate(f, 0.2, 1e-12)
        ts = np.linspace(1, 0.2, 30)
        assert np.allclose(traj(ts)[:, 0], ref(ts), atol=1e-10)


def test_exp_tower_initial_value():
    f = exp_tower(3)
    assert np.array_equal(integrate(f, 0.0).final, [1, 1, 1])
    assert not f.is_poly


def test_round_trip_exp():
    f = builtin("exp")
    assert pivp_deserialize(pivp_serialize(f)) == f


def test_missing_field_is_named():
    doc = pivp_to_json(builtin("sin"))
    del doc["y0"]
    with pytest.raises(PIVPFormatError, match="y0"):
        pivp_from_json(doc)


def test_third_survives_exactly():
    f = builtin("const", Fraction(1, 3))
    text = pivp_serialize(f)
    assert '"1/3"' in text and "0.333" not in text
    assert pivp_deserialize(text).y0[0].rational == Fraction(1, 3)


def test_approximate_coefficients_are_marked():
    f = PIVP(builtin("sin").rhs, (0,), (Coefficient.approx(0.1), 1))
    g = pivp_deserialize(pivp_serialize(f))
    assert g.is_approximate and g == f


def test_random_round_trips_are_bit_exact():
    rng = np.random.default_rng(7)
    for _ in range(100):
        f = random_pivp(rng)
        text = pivp_serialize(f)
        g = pivp_deserialize(text)
        assert g == f
        assert pivp_serialize(g) == text
        assert json.loads(text)["rhs"] == [[p.to_text() for p in row] for row in f.rhs]


def test_malformed_documents():
    good = pivp_to_json(builtin("sin"))
    for key, value in (("version", 99), ("n", 5), ("rhs", [["y1 +"]]), ("bound", {"op": "?"})):
        doc = dict(good, **{key: value})
        with pytest.raises(ValueError):
            pivp_from_json(doc)
    with pytest.raises(ValueError):
        pivp_deserialize("not json")
