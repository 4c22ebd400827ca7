import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpac.pivp import builtin, pivp_validate
from gpac.zoo import (GRID_LAMBDA, GRID_MU, GRID_X, ZOO, Exceptions, abs_, abs_generator,
                      approx_combine, approx_constant, approx_extend, approx_generable,
                      approx_periodic, approx_piecewise, approx_sign, check_abs,
                      check_floor, check_lxh, check_max_delta, check_max_min, check_round,
                      check_sign, check_tanh, clamp, clamp_generator, cltan, cltan_generator,
                      evaluate_generator, hxl, hxl_generator, ip1, ip1_generator, lxh,
                      lxh_generator, mn, mn_generator, modulus_poly_expr, modulus_polynomial,
                      mx, mx_delta, mx_generator, norm_inf, norm_inf_generator, nz, nz_generator,
                      rnd, rnd_generator, sg, sg_generator, sincos_pi, square_wave, staircase)

mp.mp.dps = 40
E = math.exp
SUB = GRID_X[::8]


# ---------------------------------------------------------------------------
# high-precision oracles written directly from the defining formulas

def mp_sg(x, mu, lam):
    return mp.tanh(mp.mpf(x) * mu * lam)


def mp_ip1(x, mu, lam):
    return (1 + mp_sg(mp.mpf(x) - 1, mu, lam)) / 2


def mp_abs(x, mu, lam):
    k = 1 + mp.mpf(lam) * mu
    return mp.log(2 * mp.cosh(k * x)) / k


def mp_nz(x, mu, lam):
    return x + (mp.mpf(2) / lam) * mp_ip1(1 - x + mp.mpf(3) / (4 * lam), mu + 1, 4 * lam)


def mp_rnd(x, mu, lam):
    th = mp.pi * mp.mpf(x)
    c = mp.cos(th)
    cl = mp.sin(th) / mp.sqrt(mp_nz(c * c, mu + 16 * lam**3, 4 * lam**2)) \
        * mp_sg(c, mu + 3 * lam, 2 * lam)
    return mp.mpf(x) - mp.atan(cl) / mp.pi


# ---------------------------------------------------------------------------
# documented values

def test_sign_and_step_values():
    assert sg(0, 5, 3) == 0
    assert sg(1, 3, 2) == math.tanh(6) and abs(1 - math.tanh(6)) <= E(-6)
    for mu, lam in ((1, 2), (4, 7)):
        assert ip1(1, mu, lam) == 0.5


def test_abs_and_max_values():
    assert abs_(0, 2, 3) == pytest.approx(math.log(2) / 7, rel=1e-15)
    for mu, lam in ((1, 2), (3, 5)):
        assert mx(2, 2, mu, lam) == pytest.approx(2 + math.log(2) / (2 * (1 + lam * mu)),
                                                  rel=1e-15)


def test_min_is_the_complement_of_max_on_grid():
    y = np.linspace(-3, 3, 13)[:, None]
    for mu in GRID_MU:
        for lam in GRID_LAMBDA:
            assert np.array_equal(mn(GRID_X, y, mu, lam), GRID_X + y - mx(GRID_X, y, mu, lam))


def test_norm_value():
    v = norm_inf([1, -3, 2], 0.5)
    assert 3 <= v <= 3.5


def test_round_values():
    ints = np.arange(-5, 6, dtype=float)
    for mu in (1, 5):
        for lam in (2, 4):
            assert np.array_equal(rnd(ints, mu, lam), ints)
    assert abs(rnd(0.2, 5, 4)) <= E(-5)
    for mu in (1, 3, 8):
        assert abs(rnd(0.49, mu, 2)) <= 0.5
    with pytest.raises(ValueError):
        rnd(0.3, 1, 1.5)


def test_switch_values():
    for mu in (1, 4):
        assert lxh(1, 3, 2, mu, 10) == 5
    assert abs(lxh(1, 3, 0, 4, 10)) <= E(-4)
    assert abs(hxl(1, 2, 0, 4, 10) - 10) <= E(-4)
    with pytest.raises(ValueError):
        lxh(3, 1, 0, 1, 1)


def test_clamp_values():
    theta = 2 * 10 + 1 / 2
    v = clamp(0, 1, 0.5, 5, 10)
    assert 0 < v < 1 and abs(v - 0.5) <= E(-5)
    for mu, lam in ((1, 1), (5, 10)):
        assert 0 < clamp(0, 1, 50, mu, lam) < 1
    # rounding in the smooth max scales with the size of its arguments (|x| = 50)
    assert clamp(0, 1, -50, 5, 10) >= 1 / theta - 4 * 50 * np.finfo(float).eps > 0
    with pytest.raises(ValueError):
        clamp(1, 1, 0.5, 1, 1)


def test_delta_parameter_checked():
    with pytest.raises(ValueError):
        mx_delta([1, 2], 0)
    with pytest.raises(ValueError):
        norm_inf([1, 2], 1.5)


def test_exact_half_turn_reduction():
    s, c = sincos_pi(np.arange(-6, 7) / 2)
    assert np.all(s[::2] == 0) and np.all(c[1::2] == 0)
    x = np.linspace(-3, 3, 37)
    s, c = sincos_pi(x)
    assert np.allclose(s, np.sin(np.pi * x), atol=1e-15)
    assert np.allclose(c, np.cos(np.pi * x), atol=1e-15)


# ---------------------------------------------------------------------------
# reference evaluators against high precision

@pytest.mark.parametrize("mu,lam", [(1, 2), (3, 4), (8, 8)])
def test_reference_matches_high_precision(mu, lam):
    xs = SUB
    for f, g in ((sg, mp_sg), (ip1, mp_ip1), (abs_, mp_abs), (nz, mp_nz)):
        got = f(xs, mu, lam)
        want = np.array([float(g(x, mu, lam)) for x in xs])
        assert np.allclose(got, want, rtol=1e-14, atol=1e-15), f.__name__
    got = rnd(xs, mu, lam)
    want = np.array([float(mp_rnd(x, mu, lam)) for x in xs])
    assert np.max(np.abs(got - want)) <= 1e-12


def test_cltan_is_a_clamped_tangent():
    th = np.linspace(-1.2, 1.2, 25)
    assert np.allclose(cltan(th, 8, 4), np.tan(th), rtol=1e-6)


# ---------------------------------------------------------------------------
# inequality families on the standard grid

@pytest.mark.parametrize("check", [check_tanh, check_sign, check_floor, check_round, check_abs,
                                   check_max_min, check_lxh])
def test_grid_inequalities(check):
    c = check()
    assert c.checked > 0
    assert c.ok, c.line()


def test_max_delta_inequalities():
    c = check_max_delta()
    assert c.ok and c.checked >= 5 * 4 * 400 * 4, c.line()


def test_inequality_check_reports_violations():
    from gpac.zoo import InequalityCheck
    c = InequalityCheck("demo")
    c.add(np.array([1.0, 2.0]), np.array([1.5, 1.0]))
    assert not c.ok and c.violations == 1 and c.line().startswith("FAIL demo")


# ---------------------------------------------------------------------------
# properties

mus = st.floats(0.5, 8)
lams = st.floats(2, 8)
xs_ = st.floats(-4, 4)


@given(xs_, xs_, mus, lams)
@settings(max_examples=200, deadline=None)
def test_sign_and_step_are_monotone(a, b, mu, lam):
    lo, hi = min(a, b), max(a, b)
    assert sg(lo, mu, lam) <= sg(hi, mu, lam)
    assert ip1(lo, mu, lam) <= ip1(hi, mu, lam)


@given(xs_, xs_, mus, lams)
@settings(max_examples=200, deadline=None)
def test_over_approximations(x, y, mu, lam):
    assert abs_(x, mu, lam) >= abs(x) * (1 - 1e-15)
    assert mx(x, y, mu, lam) >= max(x, y) - 1e-15
    assert mn(x, y, mu, lam) <= min(x, y) + 1e-15


@given(st.lists(xs_, min_size=1, max_size=6), st.sampled_from([1.0, 0.5, 0.1]))
@settings(max_examples=200, deadline=None)
def test_norm_over_approximates(v, delta):
    n = norm_inf(v, delta)
    assert max(abs(u) for u in v) - 1e-12 <= n <= max(abs(u) for u in v) + delta + 1e-12


@given(st.floats(-50, 50), st.floats(-3, 3), st.floats(0.1, 3), mus, st.floats(0, 8))
@settings(max_examples=80, deadline=None)
def test_clamp_stays_inside(x, a, width, mu, extra):
    # the clamp target interval is non-empty once lam >= 3 / (4 width)
    lam = 3 / (4 * width) + extra
    b = a + width
    v = clamp(a, b, x, mu, lam)
    theta = 2 * lam + 1 / (2 * width)
    assert a < v < b
    assert v >= a + 1 / theta - 8 * np.finfo(float).eps * max(1, abs(a), abs(b), abs(x))


def test_clamp_can_leave_for_small_lambda():
    # below lam = 3 / (4 width) the target interval is empty
    assert clamp(0, 0.5, 0.0, 1, 0.5) > 0.5


@given(st.floats(-3, 3), mus, lams)
@settings(max_examples=200, deadline=None)
def test_round_symmetries(x, mu, lam):
    assert rnd(-x, mu, lam) == pytest.approx(-rnd(x, mu, lam), abs=1e-12)
    assert rnd(x + 1, mu, lam) == pytest.approx(rnd(x, mu, lam) + 1, abs=1e-12)


@given(xs_, mus, st.floats(-5, 5))
@settings(max_examples=200, deadline=None)
def test_switches_bounded_by_value(t, mu, x):
    for a, b in ((-1, 1), (0, 0.5)):
        assert abs(lxh(a, b, t, mu, x)) <= abs(x) * (1 + 1e-15)
        assert lxh(a, b, t, mu, x) + hxl(a, b, t, mu, x) == pytest.approx(x, abs=1e-12)


# ---------------------------------------------------------------------------
# generators

GENERATORS = [sg_generator, ip1_generator, abs_generator, mx_generator, mn_generator,
              nz_generator, cltan_generator, rnd_generator, lxh_generator, hxl_generator,
              lambda: clamp_generator(0, 1), lambda: norm_inf_generator(3, 1)]


@pytest.mark.parametrize("make", GENERATORS)
def test_generators_are_valid_and_polynomially_bounded(make):
    f = make()
    assert pivp_validate(f) == []
    assert f.is_poly
    assert not f.bound.is_monotone() is False


def _compiled_grid(name, params_list, tol=1e-8):
    z = ZOO[name]
    worst = 0.0
    for p in params_list:
        ref = z.check(GRID_X, p)[0]
        worst = max(worst, float(np.max(np.abs(z.compiled(GRID_X, p) - ref))))
    assert worst <= tol, (name, worst)


ML = [{"mu": m, "lambda": l} for m in GRID_MU for l in GRID_LAMBDA]


@pytest.mark.parametrize("name", ["sg", "ip1", "abs"])
def test_compiled_matches_reference_on_standard_grid(name):
    _compiled_grid(name, ML)


def test_compiled_max_on_standard_grid():
    _compiled_grid("mx", [dict(p, y=y) for p in ML[::3] for y in (0.0, 1.5, -2.25)])
    _compiled_grid("mn", [dict(p, y=y) for p in ML[::7] for y in (0.0, 1.5)])


@pytest.mark.parametrize("name", ["lxh", "hxl"])
def test_compiled_switches_on_standard_grid(name):
    params = [{"mu": m, "x": x, "a": a, "b": b} for m in GRID_MU for x in (-3.0, 0.5, 4.0)
              for a, b in ((-1, 1), (1, 3))]
    _compiled_grid(name, params)


def test_compiled_nz_and_clamp():
    _compiled_grid("nz", [{"mu": m, "lambda": l} for m in (1, 4, 8) for l in (2, 5, 8)], 1e-10)
    z = ZOO["clamp"]
    xs = np.linspace(0.2, 0.8, 25)
    for p in ({"mu": 2, "lambda": 3}, {"mu": 1, "lambda": 1}):
        assert np.max(np.abs(z.compiled(xs, p) - z.check(xs, p)[0])) <= 1e-8


def test_compiled_cltan():
    f = cltan_generator()
    th = np.linspace(-1.0, 1.0, 21)
    got = evaluate_generator(f, [[t, 1, 2] for t in th])
    assert np.max(np.abs(got - cltan(th, 1, 2))) <= 1e-8


def test_compiled_round_on_its_conditioned_range():
    z = ZOO["rnd"]
    cases = [(2, 0.2), (3, 0.1), (4, 0.1)]
    for lam, reach in cases:
        xs = GRID_X[np.abs(GRID_X) <= reach + 1e-9]
        for mu in GRID_MU:
            p = {"mu": mu, "lambda": lam}
            err = np.max(np.abs(z.compiled(xs, p) - z.check(xs, p)[0]))
            assert err <= 1e-8, (lam, mu, err)


# ---------------------------------------------------------------------------
# the zoo table

def test_zoo_table_checks_pass():
    for name, z in ZOO.items():
        for p in ({"mu": 5}, {"mu": 2}):
            if "lambda" in dict(z.defaults):
                p = dict(p, **{"lambda": 4})
            ref, bound, ok = z.check(GRID_X, p)
            assert ok.all(), name


def test_zoo_table_rejects_unknown_parameters():
    with pytest.raises(ValueError, match="unknown parameter"):
        ZOO["sg"].params({"nu": 1})


# ---------------------------------------------------------------------------
# approximable functions

LAMS = (4, 8)


def test_sum_of_generables():
    F = approx_combine(approx_generable("sin", np.sin, builtin("sin")),
                       approx_generable("tanh", np.tanh, builtin("tanh")))
    for mu in (1, 4):
        assert F.max_error(GRID_X, mu, 4) <= 1e-15
    assert F.exceptions.points == ()


def test_product_of_signs():
    S = approx_sign()
    P = approx_combine(S, S, "product")
    assert P.exceptions.points == (0.0,)
    for mu in (1, 3, 6):
        for lam in (2, 4, 8):
            assert P.max_error(GRID_X, mu, lam) <= E(-mu)


def test_exception_union():
    S = approx_sign()
    shifted = approx_piecewise([1.0], [approx_constant(0), approx_constant(1)])
    both = approx_combine(S, shifted)
    assert both.exceptions.points == (0.0, 1.0)
    assert not both.admissible(np.array([0.1, 0.9]), 8).any()
    for mu in (2, 5):
        assert both.max_error(GRID_X, mu, 8) <= E(-mu)


def test_single_piece_shifts_precision():
    S = approx_sign()
    one = approx_piecewise([], [S])
    assert np.array_equal(one.approx(GRID_X, 3, 4), S.approx(GRID_X, 4, 4))


def test_two_piece_switch():
    F = approx_piecewise([0.0], [approx_constant(0), approx_constant(1)])
    for mu in (1, 4, 8):
        for lam in (2, 8):
            assert F.max_error(GRID_X, mu, lam) <= E(-mu)


def test_staircase():
    F = staircase()
    assert F.exceptions.points == (-1.0, 1.0)
    for mu in (2, 4, 6):
        for lam in LAMS:
            assert F.max_error(GRID_X, mu, lam) <= E(-mu)
    inside = F.approx(np.array([0.0]), 4, 8)
    assert abs(inside[0]) <= E(-4)


def test_square_wave():
    F = square_wave()
    assert F.exceptions.describe() == "{-1, 0} + 2Z"
    for mu in (2, 4, 6):
        for lam in LAMS:
            assert F.max_error(GRID_X, mu, lam) <= E(-mu)
    wide = np.linspace(-40, 40, 4001)
    assert F.max_error(wide, 4, 8) <= E(-4)
    assert np.all(np.abs(F.approx(GRID_X, 2, 4)) <= 1 + 1e-9)


def test_periodic_sine():
    F = approx_generable("sin", np.sin, builtin("sin"))
    P = approx_periodic(F, (-math.pi, math.pi), "sin-periodic")
    xs = GRID_X * 3
    for mu in (2, 4, 6):
        for lam in LAMS:
            assert P.max_error(xs, mu, lam) <= E(-mu)
    # inside the dead zones only boundedness is claimed
    assert np.all(np.abs(P.approx(xs, 2, 4)) <= 1 + 1e-12)


def test_restricted_piece_is_extended():
    body = approx_generable("sq", lambda x: x * x, None)
    with pytest.raises(ValueError):
        approx_extend(body)
    G = approx_generable("sin", np.sin, builtin("sin"))
    restricted = type(G)("sin on (0, 1)", G.target, G.approx, interval=(0.0, 1.0),
                         generator=G.generator)
    ext = approx_extend(restricted)
    inside = np.linspace(0.3, 0.7, 9)
    for mu in (2, 4):
        assert ext.max_error(inside, mu, 8) <= E(-mu)
    far = ext.approx(np.array([-30.0, 30.0]), 2, 8)
    assert np.all((far > -0.01) & (far < math.sin(1) + 0.01))


def test_piecewise_rejects_bad_breakpoints():
    c = approx_constant(1)
    with pytest.raises(ValueError):
        approx_piecewise([1.0, 0.0], [c, c, c])
    with pytest.raises(ValueError):
        approx_piecewise([0.0], [c])


def test_exception_distances():
    e = Exceptions((0.0, 0.5), 2.0)
    assert np.allclose(e.distance(np.array([2.0, 2.6, -1.0])), [0.0, 0.1, 0.5])
    assert Exceptions().distance(np.array([3.0]))[0] == math.inf


def test_modulus_polynomials():
    f = sg_generator()
    alpha = np.linspace(0, 10, 11)
    value = modulus_polynomial(f, alpha)
    poly = modulus_poly_expr(f)
    assert np.all(np.diff(value) >= 0)
    assert np.all(np.array([poly.evaluate([a]) for a in alpha]) >= value)


# ---------------------------------------------------------------------------
# compiled approximators

def test_compiled_sum_and_product():
    S = approx_sign()
    pts = np.array([0.3, 0.6, 0.9, 2.0])
    for F in (approx_combine(S, approx_constant(2)), approx_combine(S, S, "product")):
        g = F.generator()
        assert g.is_poly and pivp_validate(g) == []
        got = evaluate_generator(g, [[x, 2, 4] for x in pts])
        assert np.allclose(got, F.approx(pts, 2, 4), atol=1e-8)


def test_compiled_staircase_near_its_base():
    F = staircase()
    g = F.generator()
    assert g.is_poly
    pts = np.array([-1.3, -1.0, -0.8])
    got = evaluate_generator(g, [[x, 2, 4] for x in pts])
    assert np.allclose(got, F.approx(pts, 2, 4), atol=1e-8)


def test_square_wave_system_is_out_of_double_range():
    with pytest.raises(ValueError, match="double range"):
        square_wave().generator()
