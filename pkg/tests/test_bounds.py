import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpac.bounds import BoundExpr
from conftest import random_bound

A = BoundExpr.identity()


def test_evaluation_matches_closed_forms():
    alpha = np.linspace(0, 5, 11)
    two = BoundExpr.const(2)
    assert np.allclose((A * A + two)(alpha), alpha**2 + 2)
    assert np.allclose(BoundExpr.maximum(A, two)(alpha), np.maximum(alpha, 2))
    assert np.allclose((A ** 3).compose(A + two)(alpha), (alpha + 2) ** 3)
    assert np.allclose(A.exp()(alpha), np.exp(alpha))
    assert (A.exp().exp().exp())(10.0) == math.inf


def test_poly_flag():
    assert (A * A + BoundExpr.const(1)).is_poly()
    assert not BoundExpr.maximum(A, A.exp()).is_poly()


def test_invalid_nodes():
    with pytest.raises(ValueError):
        BoundExpr("sqrt")
    with pytest.raises(ValueError):
        BoundExpr.const(-1)
    with pytest.raises(ValueError):
        BoundExpr.from_json({"op": "add", "args": [{"op": "id"}]})
    with pytest.raises(ValueError):
        A.exp().majorant()


def test_string_form():
    assert str(BoundExpr.maximum(A, BoundExpr.const(1) + A ** 2)) == "max(a, (1 + a^2))"


@given(st.integers(0, 10_000))
@settings(max_examples=80, deadline=None)
def test_random_bounds_are_monotone_and_round_trip(seed):
    b = random_bound(np.random.default_rng(seed), depth=3)
    assert b.is_monotone(hi=50.0, samples=201)
    assert BoundExpr.from_json(b.to_json()) == b


@given(st.integers(0, 10_000), st.floats(0, 30))
@settings(max_examples=80, deadline=None)
def test_majorant_dominates(seed, alpha):
    rng = np.random.default_rng(seed)
    b = random_bound(rng, depth=3)
    if not b.is_poly():
        return
    m = b.majorant()
    assert all(float(c) >= 0 for c in m.terms.values())
    assert m.evaluate([alpha]) >= b(alpha) * (1 - 1e-12)
