"""Generable approximations of non-generable functions.

Every function here comes in two forms: a vectorised numpy reference
evaluator, and a generator that builds the corresponding polynomial IVP
through the closure operations. The generators take their inputs as
``(x, mu, lambda)`` (or the analogue for two-argument functions) and are based
at points chosen so that the inner arguments of every ``tanh`` move
monotonically along straight paths leaving the base.

The second half of the module packages approximators as
:class:`ApproxFunction` objects and implements the constructions that combine
them: sums and products, piecewise gluing and periodic extension.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .bounds import BoundExpr
from .closure import (apply_polynomial, compose, coordinates, modulus_polynomial_value,
                      ode_rewrite_controlled, reciprocal, stack, with_bound)
from .pivp import PIVP, DomainDecl, builtin
from .polynomial import Coefficient, PolyMatrix, Polynomial

# standard grid for the inequality checks
GRID_X = np.round(np.arange(-400, 401) / 100.0, 2)
GRID_MU = tuple(range(1, 9))
GRID_LAMBDA = tuple(range(2, 9))

_ALPHA = BoundExpr.identity()

# exp(-800) underflows to zero in double precision, so raising a precision
# beyond this value cannot change any floating-point guarantee; capping keeps
# astronomically large dominating moduli from producing inf * 0 = nan
PRECISION_CAP = 800.0


def _vars(n: int) -> list[Polynomial]:
    return [Polynomial.variable(i, n) for i in range(n)]


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, Coefficient):
        return v.rational
    if isinstance(v, float):
        return Fraction(v).limit_denominator(10**9) if v != int(v) else Fraction(int(v))
    return Fraction(v)


# ---------------------------------------------------------------------------
# reference evaluators

def sg(x, mu, lam):
    """Smooth sign: ``tanh(x mu lam)``."""
    return np.tanh(np.asarray(x, dtype=float) * mu * lam)


def ip1(x, mu, lam):
    """Smooth step from 0 to 1 located at ``x = 1``."""
    return (1.0 + sg(np.asarray(x, dtype=float) - 1.0, mu, lam)) / 2.0


def log2cosh(u):
    """``ln(2 cosh u)``, computed without overflow."""
    u = np.asarray(u, dtype=float)
    return np.logaddexp(u, -u)


def abs_(x, mu, lam):
    """Smooth absolute value ``ln(2 cosh(k x)) / k`` with ``k = 1 + lam mu``."""
    k = 1.0 + np.asarray(lam, dtype=float) * mu
    return log2cosh(k * np.asarray(x, dtype=float)) / k


def mx(x, y, mu, lam):
    """Smooth maximum ``(x + y + abs(y - x)) / 2``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (y + x + abs_(y - x, mu, lam)) / 2.0


def mn(x, y, mu, lam):
    """Smooth minimum ``x + y - mx(x, y)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return x + y - mx(x, y, mu, lam)


def _check_delta(delta):
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")


def _check_interval(a, b):
    if not a < b:
        raise ValueError(f"interval needs a < b, got [{a}, {b}]")


def mx_delta(xs: Sequence, delta: float):
    """Maximum of ``n`` values up to ``delta``: nested ``mx`` with ``mu = 1``, ``lam = n / delta``."""
    _check_delta(delta)
    xs = [np.asarray(v, dtype=float) for v in xs]
    n = len(xs)
    if n == 0:
        raise ValueError("mx_delta needs at least one value")
    lam = n / delta
    out = xs[-1]
    for v in reversed(xs[:-1]):
        out = mx(v, out, 1.0, lam)
    return out


def abs_delta(x, delta: float):
    """Absolute value up to ``delta``."""
    x = np.asarray(x, dtype=float)
    return mx_delta([x, -x], delta)


def norm_inf(xs: Sequence, delta: float):
    """Infinity norm up to ``delta``: ``mx_{delta/2}`` of the ``abs_{delta/2}`` values."""
    _check_delta(delta)
    return mx_delta([abs_delta(v, delta / 2.0) for v in xs], delta / 2.0)


def nz(x, mu, lam):
    """Positive shift of ``x`` near zero: ``nz >= 1 / (2 lam)`` for ``x >= 0``."""
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    return x + (2.0 / lam) * ip1(1.0 - x + 3.0 / (4.0 * lam), np.asarray(mu) + 1.0, 4.0 * lam)


def _cltan_sc(s, c, mu, lam):
    lam = np.asarray(lam, dtype=float)
    den = np.sqrt(nz(c * c, np.asarray(mu) + 16.0 * lam**3, 4.0 * lam**2))
    return s / den * sg(c, np.asarray(mu) + 3.0 * lam, 2.0 * lam)


def cltan(theta, mu, lam):
    """Tangent clamped near the poles, with the sign of ``cos`` smoothed."""
    theta = np.asarray(theta, dtype=float)
    return _cltan_sc(np.sin(theta), np.cos(theta), mu, lam)


def sincos_pi(x):
    """``(sin(pi x), cos(pi x))`` with exact zeros at integers and half-integers."""
    x = np.asarray(x, dtype=float)
    n = np.round(x)
    r = x - n  # exact, |r| <= 1/2
    sign = np.where(np.mod(n, 2) == 0, 1.0, -1.0)
    return sign * np.sin(np.pi * r), sign * np.sin(np.pi * (0.5 - np.abs(r)))


def rnd(x, mu, lam):
    """Smooth rounding to the nearest integer (requires ``lam >= 2``)."""
    if np.any(np.asarray(lam) < 2):
        raise ValueError("rnd requires lambda >= 2")
    x = np.asarray(x, dtype=float)
    s, c = sincos_pi(x)
    return x - np.arctan(_cltan_sc(s, c, mu, lam)) / np.pi


def lxh(a, b, t, mu, x):
    """Approximately ``0`` for ``t <= a`` and ``x`` for ``t >= b``."""
    _check_interval(a, b)
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    delta = (b - a) / 2.0
    nu = np.asarray(mu, dtype=float) + np.log1p(x * x)
    return ip1(t - (a + b) / 2.0 + 1.0, nu, 1.0 / delta) * x


def hxl(a, b, t, mu, x):
    """Approximately ``x`` for ``t <= a`` and ``0`` for ``t >= b``."""
    _check_interval(a, b)
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    delta = (b - a) / 2.0
    nu = np.asarray(mu, dtype=float) + np.log1p(x * x)
    return ip1((a + b) / 2.0 - t + 1.0, nu, 1.0 / delta) * x


def clamp(a, b, x, mu, lam):
    """Smooth clamp of ``x`` into ``[a + 1/theta, b - 1/theta]``, ``theta = 2 lam + 1/(2(b - a))``.

    The output lies strictly inside ``(a, b)`` whenever ``lam >= 3 / (4 (b - a))``,
    which makes the target interval non-empty. For smaller ``lam`` it can exceed
    ``b`` by a small amount.
    """
    _check_interval(a, b)
    theta = 2.0 * np.asarray(lam, dtype=float) + 1.0 / (2.0 * (b - a))
    inner = mn(x, b - 1.0 / theta, np.asarray(mu) + 1.0, theta)
    return mx(a + 1.0 / theta, inner, np.asarray(mu) + 1.0, theta)


# ---------------------------------------------------------------------------
# inequality checks

@dataclass
class InequalityCheck:
    """Outcome of checking one family of inequalities on a grid."""

    name: str
    checked: int = 0
    violations: int = 0
    worst: float = 0.0  # largest excess over the bound (<= 0 when all hold)

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def add(self, lhs, rhs, mask=None):
        lhs = np.broadcast_to(np.asarray(lhs, dtype=float), np.broadcast(lhs, rhs).shape)
        rhs = np.broadcast_to(np.asarray(rhs, dtype=float), lhs.shape)
        if mask is not None:
            m = np.broadcast_to(mask, lhs.shape)
            lhs, rhs = lhs[m], rhs[m]
        slack = 4 * np.finfo(float).eps * np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
        excess = lhs - rhs
        first = self.checked == 0
        self.checked += lhs.size
        self.violations += int(np.count_nonzero(excess > slack))
        if lhs.size:
            top = float(np.max(excess))
            self.worst = top if first else max(self.worst, top)

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"{status} {self.name}: {self.checked} inequalities, {self.violations} violations"


def _mesh(xs=None, mus=GRID_MU, lams=GRID_LAMBDA):
    xs = GRID_X if xs is None else np.asarray(xs, dtype=float)
    return np.meshgrid(xs, np.asarray(mus, float), np.asarray(lams, float), indexing="ij")


def check_tanh(xs=None) -> InequalityCheck:
    """``1 - sgn(t) tanh(t) <= exp(-|t|)``."""
    c = InequalityCheck("tanh tail")
    t = GRID_X if xs is None else np.asarray(xs, dtype=float)
    t = np.concatenate([t, t * 7.0])
    c.add(1.0 - np.sign(t) * np.tanh(t), np.exp(-np.abs(t)))
    return c


def check_sign(xs=None, mus=GRID_MU, lams=GRID_LAMBDA) -> InequalityCheck:
    c = InequalityCheck("smooth sign")
    x, mu, lam = _mesh(xs, mus, lams)
    err = np.abs(np.sign(x) - sg(x, mu, lam))
    tail = np.exp(-np.abs(x) * lam * mu)
    c.add(err, tail)
    c.add(tail, 1.0)
    c.add(err, np.exp(-mu), mask=np.abs(x) >= 1.0 / lam)
    c.add(-np.diff(sg(x, mu, lam), axis=0), 0.0)
    return c


def check_floor(xs=None, mus=GRID_MU, lams=GRID_LAMBDA) -> InequalityCheck:
    c = InequalityCheck("smooth step")
    x, mu, lam = _mesh(xs, mus, lams)
    v = ip1(x, mu, lam)
    step = (x >= 1).astype(float)
    err = np.abs(step - v)
    tail = np.exp(-np.abs(x - 1) * lam * mu) / 2.0
    c.add(err, tail)
    c.add(tail, 0.5)
    c.add(err, np.exp(-mu), mask=np.abs(1 - x) >= 1.0 / lam)
    c.add(-np.diff(v, axis=0), 0.0)
    return c


def check_round(xs=None, mus=GRID_MU, lams=GRID_LAMBDA) -> InequalityCheck:
    c = InequalityCheck("smooth rounding")
    x, mu, lam = _mesh(xs, mus, lams)
    v = rnd(x, mu, lam)
    for n in range(int(np.floor(x.min())) - 1, int(np.ceil(x.max())) + 2):
        d = np.abs(x - n)
        c.add(np.abs(v - n), 0.5, mask=d <= 0.5)
        c.add(np.abs(v - n), np.exp(-mu), mask=d <= 0.5 - 1.0 / lam)
    ints = np.arange(-4, 5, dtype=float)
    m = np.asarray(mus, float)[:, None]
    for L in lams:
        c.add(np.abs(rnd(ints, m, L) - ints), 0.0)
    return c


def check_abs(xs=None, mus=GRID_MU, lams=GRID_LAMBDA) -> InequalityCheck:
    c = InequalityCheck("smooth absolute value")
    x, mu, lam = _mesh(xs, mus, lams)
    v = abs_(x, mu, lam)
    ax = np.abs(x)
    c.add(ax, v)
    c.add(v, ax + np.minimum(1.0 / (1.0 + lam * mu), np.exp(-ax * lam * mu)))
    c.add(v, ax + np.exp(-mu), mask=ax >= 1.0 / lam)
    c.add(np.abs(v - abs_(-x, mu, lam)), 0.0)
    return c


def check_max_min(xs=None, ys=None, mus=GRID_MU, lams=GRID_LAMBDA) -> InequalityCheck:
    """``mx``/``mn`` bounds with ``y`` on a coarse grid (step 1/4)."""
    c = InequalityCheck("smooth max/min")
    xs = GRID_X if xs is None else np.asarray(xs, dtype=float)
    ys = np.arange(-16, 17) / 4.0 if ys is None else np.asarray(ys, dtype=float)
    x, y, mu, lam = np.meshgrid(xs, ys, np.asarray(mus, float), np.asarray(lams, float),
                                indexing="ij")
    hi, lo = np.maximum(x, y), np.minimum(x, y)
    gap = np.minimum(1.0 / (1.0 + lam * mu), np.exp(-np.abs(x - y) * lam * mu))
    M, m = mx(x, y, mu, lam), mn(x, y, mu, lam)
    c.add(hi, M)
    c.add(M, hi + gap)
    c.add(lo - gap, m)
    c.add(m, lo)
    far = np.abs(x - y) >= 1.0 / lam
    c.add(M, hi + np.exp(-mu), mask=far)
    c.add(lo - np.exp(-mu), m, mask=far)
    return c


def check_max_delta(seed: int = 0, trials: int = 400) -> InequalityCheck:
    """``max <= mx_delta <= max + delta`` and the norm analogue on random vectors."""
    c = InequalityCheck("max/norm up to delta")
    rng = np.random.default_rng(seed)
    for n in (1, 2, 3, 5, 8):
        for delta in (1.0, 0.5, 0.1, 0.01):
            xs = rng.choice(GRID_X, size=(n, trials))
            m = xs.max(axis=0)
            v = mx_delta(list(xs), delta)
            c.add(m, v)
            c.add(v, m + delta)
            nrm = np.abs(xs).max(axis=0)
            w = norm_inf(list(xs), delta)
            c.add(nrm, w)
            c.add(w, nrm + delta)
    return c


def check_lxh(xs=None, mus=GRID_MU, intervals=((-1.0, 1.0), (1.0, 3.0), (0.0, 0.5))) -> InequalityCheck:
    c = InequalityCheck("lxh/hxl")
    ts = GRID_X if xs is None else np.asarray(xs, dtype=float)
    vals = np.arange(-16, 17) / 4.0
    t, mu, v = np.meshgrid(ts, np.asarray(mus, float), vals, indexing="ij")
    e = np.exp(-mu)
    for a, b in intervals:
        L, H = lxh(a, b, t, mu, v), hxl(a, b, t, mu, v)
        lo, hi = t <= a, t >= b
        c.add(np.abs(L), e, mask=lo)
        c.add(np.abs(v - H), e, mask=lo)
        c.add(np.abs(v - L), e, mask=hi)
        c.add(np.abs(H), e, mask=hi)
        c.add(np.abs(L), np.abs(v))
        c.add(np.abs(H), np.abs(v))
    return c


def check_all_inequalities(xs=None) -> list[InequalityCheck]:
    """Every inequality family on the standard grid."""
    return [check_tanh(xs), check_sign(xs), check_floor(xs), check_round(xs), check_abs(xs),
            check_max_min(xs), check_max_delta(), check_lxh(xs)]


# ---------------------------------------------------------------------------
# generators

def _on(parts: Sequence[PIVP], polys: Sequence[Polynomial], name: str = "") -> PIVP:
    """A polynomial map applied to the stacked outputs of ``parts``."""
    base = stack(parts) if len(parts) > 1 else parts[0]
    return apply_polynomial(base, polys, name=name)


def _named(f: PIVP, name: str, domain: DomainDecl | None = None, bound=None) -> PIVP:
    changes = {"name": name}
    if domain is not None:
        changes["domain"] = domain
    if bound is not None:
        changes["bound"] = bound
    return f.with_(**changes)


def _positive_params(d_lead: int, lam_lo=0) -> DomainDecl:
    """Box with the leading ``d_lead`` inputs free and ``mu > 0``, ``lam > lam_lo``."""
    return DomainDecl.box([None] * d_lead + [0, lam_lo], [None] * (d_lead + 2),
                          f"mu > 0, lambda > {lam_lo}")


def _coords(base) -> PIVP:
    return coordinates(len(base), tuple(_frac(v) for v in base))


@lru_cache(maxsize=None)
def sg_generator(base=(0, 1, 1)) -> PIVP:
    """Smooth sign on inputs ``(x, mu, lam)``."""
    x, mu, lam = _vars(3)
    inner = apply_polynomial(_coords(base), [x * mu * lam], name="x*mu*lam")
    return _named(compose(builtin("tanh"), inner), "sg")


@lru_cache(maxsize=None)
def ip1_generator(base=(1, 1, 1)) -> PIVP:
    """Smooth step on inputs ``(x, mu, lam)``."""
    x, mu, lam = _vars(3)
    inner = apply_polynomial(_coords(base), [(x - 1) * mu * lam], name="(x-1)*mu*lam")
    s = compose(builtin("tanh"), inner)
    y = _vars(1)[0]
    return _named(apply_polynomial(s, [(1 + y).scale(Fraction(1, 2))]), "ip1")


@lru_cache(maxsize=None)
def log2cosh_generator() -> PIVP:
    """``u -> ln(2 cosh u)`` as the solution of ``L' = tanh(u)``, ``L(0) = ln 2``."""
    y, u = _vars(2)
    field = compose(builtin("tanh"), apply_polynomial(coordinates(2), [u], name="u"))
    ln2 = Coefficient.approx(math.log(2.0))
    f = ode_rewrite_controlled(field, builtin("id"), [ln2])
    # every state component is either ln(2cosh u) <= |u| + ln 2, tanh, or a coordinate
    return _named(f, "ln2cosh", bound=_ALPHA + BoundExpr.const(1))


@lru_cache(maxsize=None)
def abs_generator(base=(0, 1, 1)) -> PIVP:
    """Smooth absolute value on ``(x, mu, lam)``; exact initial value needs ``x0 = 0``."""
    x, mu, lam = _vars(3)
    C = _coords(base)
    k = apply_polynomial(C, [1 + mu * lam], name="1+mu*lam")
    # 1/(1 + mu lam) <= 1 and the carried state is at most 1 + alpha^2 for mu, lam >= 0
    r = with_bound(reciprocal(k), BoundExpr.const(1) + _ALPHA * _ALPHA)
    u = apply_polynomial(C, [(1 + mu * lam) * x], name="(1+mu*lam)*x")
    L = compose(log2cosh_generator(), u)
    a, b = _vars(2)
    out = _on([L, r], [a * b])
    return _named(out, "abs", _positive_params(1))


def _mx_like(base, sign: int, name: str) -> PIVP:
    x0, y0, mu0, lam0 = (_frac(v) for v in base)
    if x0 != y0:
        raise ValueError(f"{name} generator needs a base point with x = y")
    x, y, mu, lam = _vars(4)
    C = _coords((x0, y0, mu0, lam0))
    A = compose(abs_generator((0, mu0, lam0)),
                apply_polynomial(C, [y - x, mu, lam], name="(y-x, mu, lam)"))
    v = _vars(5)
    half = Fraction(1, 2)
    if sign > 0:
        poly = (v[0] + v[1] + v[4]).scale(half)
    else:
        poly = (v[0] + v[1] - v[4]).scale(half)
    return _named(_on([C, A], [poly]), name, _positive_params(2))


@lru_cache(maxsize=None)
def mx_generator(base=(0, 0, 1, 1)) -> PIVP:
    """Smooth maximum on ``(x, y, mu, lam)``."""
    return _mx_like(base, 1, "mx")


@lru_cache(maxsize=None)
def mn_generator(base=(0, 0, 1, 1)) -> PIVP:
    """Smooth minimum on ``(x, y, mu, lam)``."""
    return _mx_like(base, -1, "mn")


def _recip_lambda(C: PIVP, index: int, lo: Fraction) -> PIVP:
    """``1 / x_index`` on a domain where ``x_index > lo > 0``."""
    v = _vars(C.output_dim)
    r = reciprocal(apply_polynomial(C, [v[index]]))
    return with_bound(r, BoundExpr.maximum(BoundExpr.const(1 / lo), _ALPHA))


@lru_cache(maxsize=None)
def nz_generator(mu0=1, lam0=1) -> PIVP:
    """``nz`` on ``(x, mu, lam)`` for ``lam > 1/2``, based at ``x = 3/(4 lam0)``."""
    mu0, lam0 = _frac(mu0), _frac(lam0)
    C = _coords((3 / (4 * lam0), mu0, lam0))
    R = _recip_lambda(C, 2, Fraction(1, 2))
    y = _vars(4)  # x, mu, lam, 1/lam
    arg = _on([C, R], [1 - y[0] + y[3].scale(Fraction(3, 4)), y[1] + 1, y[2].scale(4)])
    I = compose(ip1_generator((1, mu0 + 1, 4 * lam0)), arg)
    z = _vars(5)
    out = _on([C, R, I], [z[0] + (z[3] * z[4]).scale(2)])
    return _named(out, "nz", _positive_params(1, Fraction(1, 2)))


@lru_cache(maxsize=None)
def inv_sqrt_generator() -> PIVP:
    """``u -> u^(-1/2)`` on ``u > 0``, from ``g' = -g^3 / 2`` with ``g(1) = 1``."""
    g = _vars(1)[0]
    rhs = PolyMatrix.column([(g**3).scale(Fraction(-1, 2))])
    return PIVP(rhs, (1,), (1,), 1, None, DomainDecl.box([0], [None], "u > 0"),
                labels=("u^-1/2",), name="isqrt")


@lru_cache(maxsize=None)
def cltan_generator(mu0=1, lam0=2) -> PIVP:
    """Clamped tangent on ``(theta, mu, lam)`` for ``lam > 1/2``, based at ``theta = 0``."""
    mu0, lam0 = _frac(mu0), _frac(lam0)
    C = _coords((0, mu0, lam0))
    th = _vars(3)
    S = compose(builtin("sin"), apply_polynomial(C, [th[0]]))
    Co = compose(builtin("cos"), apply_polynomial(C, [th[0]]))
    y = _vars(4)  # theta, mu, lam, cos
    nz_arg = _on([C, Co], [y[3] ** 2, y[1] + (y[2] ** 3).scale(16), (y[2] ** 2).scale(4)])
    N = compose(nz_generator(mu0 + 16 * lam0**3, 4 * lam0**2), nz_arg)
    # nz >= 1/(8 lam^2), so its inverse square root is at most sqrt(8) lam <= 3 alpha
    Q = compose(inv_sqrt_generator(), N)
    Q = with_bound(Q, BoundExpr.maximum(N.bound, BoundExpr.const(3) * _ALPHA))
    sg_arg = _on([C, Co], [y[3], y[1] + y[2].scale(3), y[2].scale(2)])
    G = compose(sg_generator(), sg_arg)
    z = _vars(3)
    out = _on([S, Q, G], [z[0] * z[1] * z[2]])
    return _named(out, "cltan", _positive_params(1, Fraction(1, 2)))


@lru_cache(maxsize=None)
def rnd_generator(mu0=1, lam0=2) -> PIVP:
    """Smooth rounding on ``(x, mu, lam)``, based at ``x = 0``."""
    C = _coords((0, _frac(mu0), _frac(lam0)))
    x, mu, lam = _vars(3)
    T = compose(cltan_generator(mu0, lam0),
                apply_polynomial(C, [x.scale(Coefficient(1, pi=1)), mu, lam]))
    A = compose(builtin("arctan"), T)
    y = _vars(4)
    out = _on([C, A], [y[0] - y[3].scale(Coefficient(1, pi=-1))])
    return _named(out, "rnd", _positive_params(1, 1))


def _lxh_like(a, b, mu0, low_to_high: bool) -> PIVP:
    a, b, mu0 = _frac(a), _frac(b), _frac(mu0)
    _check_interval(a, b)
    mid, delta = (a + b) / 2, (b - a) / 2
    C = _coords((mid, mu0, 0))
    t, mu, x = _vars(3)
    ln = compose(builtin("ln", Fraction(1, 2)), apply_polynomial(C, [1 + x * x]))
    y = _vars(4)  # t, mu, x, ln(1 + x^2)
    shift = (y[0] - mid + 1) if low_to_high else (mid - y[0] + 1)
    arg = _on([C, ln], [shift, y[1] + y[3], Polynomial.constant(1 / delta, 4)])
    I = compose(ip1_generator((1, mu0, 1 / delta)), arg)
    z = _vars(4)  # t, mu, x, ip1
    out = _on([C, I], [z[3] * z[2]])
    name = "lxh" if low_to_high else "hxl"
    return _named(out, f"{name}[{a},{b}]",
                  DomainDecl.box([None, 0, None], [None, None, None], "mu > 0"))


@lru_cache(maxsize=None)
def lxh_generator(a=-1, b=1, mu0=1) -> PIVP:
    """``lxh`` on ``(t, mu, x)`` for the interval ``[a, b]``."""
    return _lxh_like(a, b, mu0, True)


@lru_cache(maxsize=None)
def hxl_generator(a=-1, b=1, mu0=1) -> PIVP:
    """``hxl`` on ``(t, mu, x)`` for the interval ``[a, b]``."""
    return _lxh_like(a, b, mu0, False)


@lru_cache(maxsize=None)
def clamp_generator(a, b, mu0=1, lam0=1) -> PIVP:
    """Smooth clamp into ``(a, b)`` on ``(x, mu, lam)``."""
    a, b, mu0, lam0 = _frac(a), _frac(b), _frac(mu0), _frac(lam0)
    _check_interval(a, b)
    delta = b - a
    off = 1 / (2 * delta)
    th0 = 2 * lam0 + off
    x0 = b - 1 / th0
    C = _coords((x0, mu0, lam0))
    x, mu, lam = _vars(3)
    T = reciprocal(apply_polynomial(C, [lam.scale(2) + off]))
    # 1/theta <= 2 delta, and theta <= 2 alpha + 1/(2 delta)
    T = with_bound(T, BoundExpr.maximum(BoundExpr.const(2 * delta),
                                        BoundExpr.const(2) * _ALPHA + BoundExpr.const(off)))
    y = _vars(4)  # x, mu, lam, 1/theta
    M = compose(mn_generator((x0, x0, mu0 + 1, th0)),
                _on([C, T], [y[0], b - y[3], y[1] + 1, y[2].scale(2) + off]))
    z = _vars(5)  # x, mu, lam, 1/theta, mn
    lo = a + 1 / th0
    out = compose(mx_generator((lo, lo, mu0 + 1, th0)),
                  _on([C, T, M], [a + z[3], z[4], z[1] + 1, z[2].scale(2) + off]))
    return _named(out, f"clamp({a},{b})", _positive_params(1))


@lru_cache(maxsize=None)
def mx_delta_generator(n: int, delta) -> PIVP:
    """Maximum of ``n`` inputs up to ``delta``, based at the origin."""
    delta = _frac(delta)
    _check_delta(delta)
    lam = n / delta
    C = coordinates(n)
    v = _vars(n)
    if n == 1:
        return _named(apply_polynomial(C, [v[0]]), "mx_delta")
    acc = apply_polynomial(C, [v[n - 1]])
    for i in range(n - 2, -1, -1):
        w = _vars(n + 1)
        arg = _on([C, acc], [w[i], w[n], Polynomial.constant(1, n + 1),
                             Polynomial.constant(lam, n + 1)])
        acc = compose(mx_generator((0, 0, 1, lam)), arg)
    return _named(acc, f"mx_delta[{n}]")


@lru_cache(maxsize=None)
def norm_inf_generator(n: int, delta) -> PIVP:
    """Infinity norm of ``n`` inputs up to ``delta``."""
    delta = _frac(delta)
    half = delta / 2
    C = coordinates(n)
    v = _vars(n)
    absd = mx_delta_generator(2, half)
    parts = [compose(absd, apply_polynomial(C, [v[i], -v[i]])) for i in range(n)]
    out = compose(mx_delta_generator(n, half), _on(parts, _vars(n)))
    return _named(out, f"norm_inf[{n}]")


GENERATORS: dict[str, Callable[[], PIVP]] = {
    "sg": sg_generator, "ip1": ip1_generator, "abs": abs_generator, "mx": mx_generator,
    "mn": mn_generator, "nz": nz_generator, "cltan": cltan_generator, "rnd": rnd_generator,
    "lxh": lxh_generator, "hxl": hxl_generator,
}


# ---------------------------------------------------------------------------
# zoo table

@dataclass(frozen=True)
class ZooFunction:
    """A named zoo function with its error specification.

    The function is sampled along ``variable`` with the other inputs fixed
    by ``params`` (a mapping of names to values, defaults in ``defaults``).
    ``target(v, p)`` is the exact function approximated (``nan`` inside dead
    zones, where no accuracy is claimed), ``bound(v, p)`` the guaranteed
    error, and ``weak(v, value, p)`` a sanity condition checked everywhere.
    ``generator(p)`` builds the compiled system and ``inputs(v, p)`` the
    matching input points.
    """

    name: str
    variable: str
    defaults: tuple[tuple[str, float], ...]
    reference: Callable
    target: Callable
    bound: Callable
    generator: Callable
    inputs: Callable
    description: str
    weak: Callable | None = None
    constraints: str = ""

    def params(self, given: dict | None = None) -> dict[str, float]:
        p = dict(self.defaults)
        for k, v in (given or {}).items():
            if k not in p:
                raise ValueError(f"{self.name}: unknown parameter {k!r} "
                                 f"(expected {', '.join(p)})")
            p[k] = float(v)
        return p

    def check(self, v, given: dict | None = None):
        """Reference values, error bounds and pass flags along ``v``."""
        p = self.params(given)
        v = np.asarray(v, dtype=float)
        ref = np.asarray(self.reference(v, p), dtype=float)
        tgt = np.asarray(self.target(v, p), dtype=float)
        bnd = np.broadcast_to(np.asarray(self.bound(v, p), dtype=float), v.shape)
        claimed = ~np.isnan(tgt)
        err = np.abs(ref - np.where(claimed, tgt, 0.0))
        slack = 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(ref))
        ok = np.where(claimed, err <= bnd + slack, True)
        if self.weak is not None:
            ok &= self.weak(v, ref, p)
        return ref, np.where(claimed, bnd, np.nan), ok

    def compiled(self, v, given: dict | None = None, tol: float = 1e-11) -> np.ndarray:
        p = self.params(given)
        return evaluate_generator(self.generator(p), self.inputs(np.asarray(v, float), p), tol)


def _pts(*cols):
    cols = np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in cols])
    return np.stack(cols, axis=-1)


def _exact_param(v) -> Fraction:
    return Fraction(v).limit_denominator(10**6)


def _lxh_target(t, p, low_to_high):
    lo, hi = p["a"], p["b"]
    x = p["x"]
    before, after = (0.0, x) if low_to_high else (x, 0.0)
    return np.where(t <= lo, before, np.where(t >= hi, after, np.nan))


def _clamp_target(x, p):
    inside = (x >= p["a"] + 1 / p["lambda"]) & (x <= p["b"] - 1 / p["lambda"])
    return np.where(inside, x, np.nan)


def _round_target(x, p):
    x = np.asarray(x, dtype=float)
    return np.floor(x + 0.5)


def _round_bound(x, p):
    d = np.abs(x - np.floor(x + 0.5))
    return np.where(d <= 0.5 - 1.0 / p["lambda"], np.exp(-p["mu"]), 0.5)


_ML = (("mu", 1.0), ("lambda", 2.0))

ZOO: dict[str, ZooFunction] = {
    "sg": ZooFunction(
        "sg", "x", _ML, lambda x, p: sg(x, p["mu"], p["lambda"]),
        lambda x, p: np.sign(x),
        lambda x, p: np.exp(-np.abs(x) * p["lambda"] * p["mu"]),
        lambda p: sg_generator(), lambda x, p: _pts(x, p["mu"], p["lambda"]),
        "smooth sign tanh(x mu lambda)"),
    "ip1": ZooFunction(
        "ip1", "x", _ML, lambda x, p: ip1(x, p["mu"], p["lambda"]),
        lambda x, p: (x >= 1).astype(float),
        lambda x, p: np.exp(-np.abs(x - 1) * p["lambda"] * p["mu"]) / 2,
        lambda p: ip1_generator(), lambda x, p: _pts(x, p["mu"], p["lambda"]),
        "smooth step located at 1"),
    "abs": ZooFunction(
        "abs", "x", _ML, lambda x, p: abs_(x, p["mu"], p["lambda"]),
        lambda x, p: np.abs(x),
        lambda x, p: np.minimum(1 / (1 + p["lambda"] * p["mu"]),
                                np.exp(-np.abs(x) * p["lambda"] * p["mu"])),
        lambda p: abs_generator(), lambda x, p: _pts(x, p["mu"], p["lambda"]),
        "smooth absolute value", weak=lambda x, v, p: v >= np.abs(x) * (1 - 4e-16),
        constraints="mu, lambda > 0"),
    "mx": ZooFunction(
        "mx", "x", (("y", 0.0),) + _ML, lambda x, p: mx(x, p["y"], p["mu"], p["lambda"]),
        lambda x, p: np.maximum(x, p["y"]),
        lambda x, p: np.minimum(1 / (1 + p["lambda"] * p["mu"]),
                                np.exp(-np.abs(x - p["y"]) * p["lambda"] * p["mu"])),
        lambda p: mx_generator((_exact_param(p["y"]),) * 2 + (1, 1)),
        lambda x, p: _pts(x, p["y"], p["mu"], p["lambda"]),
        "smooth maximum of x and y", constraints="mu, lambda > 0"),
    "mn": ZooFunction(
        "mn", "x", (("y", 0.0),) + _ML, lambda x, p: mn(x, p["y"], p["mu"], p["lambda"]),
        lambda x, p: np.minimum(x, p["y"]),
        lambda x, p: np.minimum(1 / (1 + p["lambda"] * p["mu"]),
                                np.exp(-np.abs(x - p["y"]) * p["lambda"] * p["mu"])),
        lambda p: mn_generator((_exact_param(p["y"]),) * 2 + (1, 1)),
        lambda x, p: _pts(x, p["y"], p["mu"], p["lambda"]),
        "smooth minimum of x and y", constraints="mu, lambda > 0"),
    "nz": ZooFunction(
        "nz", "x", _ML, lambda x, p: nz(x, p["mu"], p["lambda"]),
        lambda x, p: np.asarray(x, dtype=float), lambda x, p: 2.0 / p["lambda"],
        lambda p: nz_generator(_exact_param(p["mu"]), _exact_param(p["lambda"])),
        lambda x, p: _pts(x, p["mu"], p["lambda"]),
        "shift away from zero",
        weak=lambda x, v, p: np.where(x >= 0, v >= 1 / (2 * p["lambda"]), True),
        constraints="lambda > 1/2"),
    "rnd": ZooFunction(
        "rnd", "x", _ML, lambda x, p: rnd(x, p["mu"], p["lambda"]),
        _round_target, _round_bound,
        lambda p: rnd_generator(_exact_param(p["mu"]), _exact_param(p["lambda"])),
        lambda x, p: _pts(x, p["mu"], p["lambda"]),
        "smooth rounding to the nearest integer", constraints="lambda >= 2"),
    "lxh": ZooFunction(
        "lxh", "t", (("a", -1.0), ("b", 1.0), ("mu", 1.0), ("x", 1.0)),
        lambda t, p: lxh(p["a"], p["b"], t, p["mu"], p["x"]),
        lambda t, p: _lxh_target(t, p, True), lambda t, p: np.exp(-p["mu"]),
        lambda p: lxh_generator(_exact_param(p["a"]), _exact_param(p["b"])),
        lambda t, p: _pts(t, p["mu"], p["x"]),
        "about 0 before the interval [a, b] and x after it",
        weak=lambda t, v, p: np.abs(v) <= abs(p["x"]) * (1 + 4e-16), constraints="a < b"),
    "hxl": ZooFunction(
        "hxl", "t", (("a", -1.0), ("b", 1.0), ("mu", 1.0), ("x", 1.0)),
        lambda t, p: hxl(p["a"], p["b"], t, p["mu"], p["x"]),
        lambda t, p: _lxh_target(t, p, False), lambda t, p: np.exp(-p["mu"]),
        lambda p: hxl_generator(_exact_param(p["a"]), _exact_param(p["b"])),
        lambda t, p: _pts(t, p["mu"], p["x"]),
        "about x before the interval [a, b] and 0 after it",
        weak=lambda t, v, p: np.abs(v) <= abs(p["x"]) * (1 + 4e-16), constraints="a < b"),
    "clamp": ZooFunction(
        "clamp", "x", (("a", 0.0), ("b", 1.0)) + _ML,
        lambda x, p: clamp(p["a"], p["b"], x, p["mu"], p["lambda"]),
        _clamp_target, lambda x, p: np.exp(-p["mu"]),
        lambda p: clamp_generator(_exact_param(p["a"]), _exact_param(p["b"])),
        lambda x, p: _pts(x, p["mu"], p["lambda"]),
        "smooth clamp into (a, b)",
        weak=lambda x, v, p: (v > p["a"]) & (v < p["b"]),
        constraints="a < b, lambda >= 3/(4(b - a))"),
}


def evaluate_generator(f: PIVP, points, tol: float = 1e-11) -> np.ndarray:
    """Evaluate a zoo generator at several input points.

    Points sharing every coordinate but the first are evaluated along one
    line from the base value of that coordinate outwards, in both directions,
    which keeps the ``tanh`` arguments monotone along the way.
    """
    from .simulator import evaluate_line

    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty(len(pts))
    x0 = np.asarray(f.x0_float(), dtype=float)
    groups: dict[tuple, list[int]] = {}
    for i, p in enumerate(pts):
        groups.setdefault(tuple(p[1:]), []).append(i)
    for rest, idx in groups.items():
        start = np.concatenate([[x0[0]], rest])
        xs = pts[idx, 0]
        for side in (xs >= x0[0], xs < x0[0]):
            sel = [i for i, s in zip(idx, side) if s]
            if not sel:
                continue
            far = pts[sel, 0]
            end_x = far[np.argmax(np.abs(far - x0[0]))]
            if end_x == x0[0]:
                v = evaluate_line(f, start, start, [0.0], tol)
                out[sel] = v[0][0]
                continue
            end = np.concatenate([[end_x], rest])
            fr = (far - x0[0]) / (end_x - x0[0])
            order = np.argsort(fr)
            vals = evaluate_line(f, start, end, fr[order], tol)
            for k, j in enumerate(order):
                out[sel[j]] = vals[k][0]
    return out


# ---------------------------------------------------------------------------
# approximable functions

@dataclass(frozen=True)
class Exceptions:
    """Finite exception points, optionally repeated with a period."""

    points: tuple[float, ...] = ()
    period: float | None = None

    def distance(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.points:
            return np.full(x.shape, np.inf)
        p = np.asarray(self.points, dtype=float)
        diff = x[..., None] - p
        if self.period is not None:
            diff = diff - self.period * np.round(diff / self.period)
        return np.min(np.abs(diff), axis=-1)

    def union(self, other: Exceptions) -> Exceptions:
        if self.period != other.period and self.points and other.points:
            if self.period is not None or other.period is not None:
                raise ValueError("cannot merge exception sets with different periods")
        period = self.period if self.points else other.period
        return Exceptions(tuple(sorted(set(self.points) | set(other.points))), period)

    def describe(self) -> str:
        pts = ", ".join(f"{p:g}" for p in self.points) or "none"
        return f"{{{pts}}}" + (f" + {self.period:g}Z" if self.period is not None else "")


@dataclass(frozen=True)
class ApproxFunction:
    """A function together with a generable approximator.

    ``approx(x, mu, lam)`` is within ``exp(-mu)`` of ``target(x)`` for every
    ``x`` in ``interval`` at distance at least ``1/lam`` from the exceptions.
    ``generator`` builds the approximator as a system on ``(x, mu, lam)``.
    ``interval`` is an open interval ``(lo, hi)``; ``None`` ends are unbounded.
    """

    name: str
    target: Callable
    approx: Callable
    exceptions: Exceptions = Exceptions()
    interval: tuple[float | None, float | None] = (None, None)
    generator: Callable[[], PIVP] | None = field(default=None, compare=False)
    min_lambda: float = 0.0

    @property
    def whole_line(self) -> bool:
        return self.interval == (None, None)

    def admissible(self, x, lam) -> np.ndarray:
        """Points where the approximation guarantee applies."""
        x = np.asarray(x, dtype=float)
        ok = self.exceptions.distance(x) >= 1.0 / np.asarray(lam, dtype=float)
        lo, hi = self.interval
        if lo is not None:
            ok &= x > lo
        if hi is not None:
            ok &= x < hi
        return ok

    def max_error(self, xs, mu, lam) -> float:
        """Largest ``|target - approx|`` over admissible points (0 if none)."""
        xs = np.asarray(xs, dtype=float)
        mask = self.admissible(xs, lam)
        if not mask.any():
            return 0.0
        err = np.abs(self.target(xs[mask]) - self.approx(xs[mask], mu, lam))
        return float(np.max(err))

    def modulus_polynomial(self, alpha):
        """Dominating modulus polynomial of the approximator, from its generator."""
        if self.generator is None:
            raise ValueError(f"{self.name}: modulus needs a generator")
        return modulus_polynomial(self.generator(), alpha)


def modulus_polynomial(f: PIVP, alpha):
    """Pointwise dominating modulus ``ceil(d sigma) max(1, sp(alpha))^deg``.

    Nondecreasing in ``alpha`` because the growth bound is.
    """
    with np.errstate(over="ignore"):
        return modulus_polynomial_value(f, alpha)


def modulus_poly_expr(f: PIVP) -> Polynomial:
    """Exact polynomial ``ceil(d sigma) (1 + S)^deg`` dominating :func:`modulus_polynomial`.

    ``S`` is a majorant of the growth bound with nonnegative coefficients.
    """
    if f.bound is None:
        raise ValueError("system has no growth bound")
    c = math.ceil(f.input_dim * f.rhs.sigma)
    return (1 + f.bound.majorant()) ** f.rhs.degree * c


def _x_map(base, polys_fn) -> PIVP:
    C = _coords(base)
    return apply_polynomial(C, polys_fn(*_vars(3)))


def approx_generable(name: str, reference: Callable, f: PIVP | None = None) -> ApproxFunction:
    """A generable function is its own approximator, for every ``mu`` and ``lam``."""
    gen = None
    if f is not None:
        if f.input_dim != 1 or f.output_dim != 1:
            raise ValueError("approx_generable expects a scalar function of one input")

        def gen(f=f):
            base = (f.x0[0], 1, 1)
            return _named(compose(f, _x_map(base, lambda x, mu, lam: [x])), name)

    return ApproxFunction(name, reference, lambda x, mu, lam: reference(np.asarray(x, float))
                          + 0.0 * np.asarray(mu) * np.asarray(lam), generator=gen)


def approx_constant(c) -> ApproxFunction:
    """The constant function ``c``."""
    cf = float(c)

    def ref(x):
        return np.full(np.shape(x), cf)

    return approx_generable(f"const({c})", ref, builtin("const", _frac(c)))


def _shifted(F: ApproxFunction, base, polys_fn) -> PIVP:
    return compose(F.generator(), _x_map(base, polys_fn))


def approx_combine(F: ApproxFunction, G: ApproxFunction, op: str = "sum") -> ApproxFunction:
    """Sum or product of two approximable functions.

    The sum uses ``F(x, mu+1, lam) + G(x, mu+1, lam)``. The product raises the
    precision of each factor by the size of the other:
    ``F(x, mu + 2 + N(G(x,1,lam)), lam) * G(x, mu + 3 + N(F(x,1,lam)), lam)``
    with ``N`` the infinity norm up to 1.
    """
    exc = F.exceptions.union(G.exceptions)
    lo = max((v for v in (F.interval[0], G.interval[0]) if v is not None), default=None)
    hi = min((v for v in (F.interval[1], G.interval[1]) if v is not None), default=None)
    if op == "sum":
        def target(x):
            return F.target(x) + G.target(x)

        def approx(x, mu, lam):
            return F.approx(x, mu + 1, lam) + G.approx(x, mu + 1, lam)
    elif op == "product":
        def target(x):
            return F.target(x) * G.target(x)

        def approx(x, mu, lam):
            ng = norm_inf([G.approx(x, 1.0, lam)], 1.0)
            nf = norm_inf([F.approx(x, 1.0, lam)], 1.0)
            return F.approx(x, mu + 2 + ng, lam) * G.approx(x, mu + 3 + nf, lam)
    else:
        raise ValueError(f"unknown combination {op!r}")

    gen = None
    if F.generator is not None and G.generator is not None:
        def gen():
            base = (F.generator().x0[0], 1, 1)
            if op == "sum":
                a = _shifted(F, base, lambda x, mu, lam: [x, mu + 1, lam])
                b = _shifted(G, base, lambda x, mu, lam: [x, mu + 1, lam])
                v = _vars(2)
                return _named(_on([a, b], [v[0] + v[1]]), f"({F.name} + {G.name})")
            C = _coords(base)
            N = norm_inf_generator(1, 1)
            v = _vars(3)
            g1 = _shifted(G, base, lambda x, mu, lam: [x, Polynomial.constant(1, 3), lam])
            f1 = _shifted(F, base, lambda x, mu, lam: [x, Polynomial.constant(1, 3), lam])
            ng = compose(N, g1)
            nf = compose(N, f1)
            w = _vars(4)
            a = compose(F.generator(), _on([C, ng], [w[0], w[1] + 2 + w[3], w[2]]))
            b = compose(G.generator(), _on([C, nf], [w[0], w[1] + 3 + w[3], w[2]]))
            return _named(_on([a, b], [_vars(2)[0] * _vars(2)[1]]), f"({F.name} * {G.name})")

    label = "+" if op == "sum" else "*"
    return ApproxFunction(f"({F.name} {label} {G.name})", target, approx, exc, (lo, hi), gen,
                          max(F.min_lambda, G.min_lambda))


def approx_extend(F: ApproxFunction) -> ApproxFunction:
    """Extend an approximator valid on a bounded interval ``(a, b)`` to the whole line.

    The input is clamped into ``(a, b)`` with a precision raised by the
    modulus polynomial of the approximator, so values far outside ``(a, b)``
    are replaced by values near the ends.
    """
    a, b = F.interval
    if a is None or b is None:
        raise ValueError(f"{F.name}: clamping needs a bounded interval; provide an "
                         "approximator defined on the whole line instead")
    if F.generator is None:
        raise ValueError(f"{F.name}: clamping needs a generator for the modulus")
    p = F.modulus_polynomial
    # raising lam by 3/(4 delta) keeps the clamp strictly inside (a, b) for every
    # lam > 0 and only widens the range where the clamp is accurate
    shift = 3 / (4 * (_frac(b) - _frac(a)))

    def approx(x, mu, lam):
        x = np.asarray(x, dtype=float)
        nrm = norm_inf([x, np.broadcast_to(mu, x.shape), np.broadcast_to(lam, x.shape)], 1.0)
        prec = np.minimum(mu + 1 + p(1 + nrm), PRECISION_CAP)
        return F.approx(clamp(a, b, x, prec, lam + float(shift)), mu + 1, lam)

    def gen():
        f = F.generator()
        base = (Fraction(a + b) / 2, 1, 1)
        C = _coords(base)
        P = modulus_poly_expr(f)
        N = compose(norm_inf_generator(3, 1), C)
        w = _vars(4)
        prec = w[1] + 1 + P.substitute([1 + w[3]])
        cl = compose(clamp_generator(_frac(a), _frac(b)), _on([C, N], [w[0], prec, w[2] + shift]))
        z = _vars(4)
        return _named(compose(f, _on([C, cl], [z[3], z[1] + 1, z[2]])), f"ext[{F.name}]")

    return ApproxFunction(f"ext[{F.name}]", F.target, approx, F.exceptions, (a, b), gen,
                          F.min_lambda)


def approx_piecewise(breakpoints: Sequence[float], pieces: Sequence[ApproxFunction],
                     name: str = "piecewise") -> ApproxFunction:
    """Glue approximable pieces at increasing breakpoints ``a_1 < ... < a_k``.

    Piece ``i`` is used on ``(a_i, a_{i+1})``. Pieces restricted to a bounded
    interval are first extended to the whole line by clamping. The result is
    ``F_0(x, nu, lam) + sum_i lxh_{[-1,1]}((x - a_i) lam, nu, F_i - F_{i-1})``
    with ``nu = mu + k + 1``; its exceptions are the breakpoints together with
    the exceptions of the pieces.
    """
    a = [float(v) for v in breakpoints]
    k = len(a)
    if len(pieces) != k + 1:
        raise ValueError("need one more piece than breakpoints")
    if any(u >= v for u, v in zip(a, a[1:])):
        raise ValueError("breakpoints must be strictly increasing")
    full = [P if P.whole_line else approx_extend(P) for P in pieces]
    exc = Exceptions(tuple(a))
    for P in full:
        exc = exc.union(P.exceptions)

    def target(x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(a, x, side="right")
        out = np.zeros(x.shape)
        for i, P in enumerate(full):
            m = idx == i
            if m.any():
                out[m] = P.target(x[m])
        return out

    def approx(x, mu, lam):
        x = np.asarray(x, dtype=float)
        nu = mu + k + 1
        vals = [P.approx(x, nu, lam) for P in full]
        out = vals[0]
        for i in range(1, k + 1):
            out = out + lxh(-1.0, 1.0, (x - a[i - 1]) * lam, nu, vals[i] - vals[i - 1])
        return out

    gen = None
    if all(P.generator is not None for P in full):
        def gen():
            base = (_frac(a[0]) if k else 0, 1, 1)
            C = _coords(base)
            shifted = [_shifted(P, base, lambda x, mu, lam: [x, mu + k + 1, lam]) for P in full]
            terms = [shifted[0]]
            for i in range(1, k + 1):
                w = _vars(5)  # x, mu, lam, F_i, F_{i-1}
                arg = _on([C, shifted[i], shifted[i - 1]],
                          [(w[0] - _frac(a[i - 1])) * w[2], w[1] + k + 1, w[3] - w[4]])
                terms.append(compose(lxh_generator(-1, 1), arg))
            return _named(_on(terms, [sum(_vars(len(terms)), Polynomial.zero(len(terms)))]),
                          name)

    return ApproxFunction(name, target, approx, exc, (None, None), gen,
                          max(P.min_lambda for P in full))


def approx_periodic(F: ApproxFunction, window: tuple[float, float],
                    name: str = "periodic") -> ApproxFunction:
    """Periodic extension of an approximator valid on a window of length ``period``.

    ``F`` approximates the function on ``window = (a, b)`` of length
    ``period = b - a``. With ``c`` the window centre, ``u = (x - c) / period``
    is reduced by smooth
    rounding at precision ``mu + 1 + p(1 + N(mu, period lam))``, where ``p``
    dominates the modulus of the approximator in the rescaled coordinates.
    The window must carry an approximator defined on the whole line, or a
    generator so that it can be extended by clamping.
    """
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ValueError("periodic extension needs a window with a < b")
    tau = hi - lo
    c = (lo + hi) / 2.0
    if F.whole_line:
        W = F
    elif F.interval == (window[0], window[1]):
        W = approx_extend(F)
    else:
        raise ValueError(f"{F.name} is valid on {F.interval}, not on the window {window}")
    base_exc = W.exceptions.points + (lo, hi)
    exc = Exceptions(tuple(sorted(set(((v - lo) % tau) + lo for v in base_exc))), tau)
    if W.generator is None:
        raise ValueError(f"{F.name}: periodic extension needs a generator for the modulus")
    scale_in = max(tau, 1.0 / tau)

    def p_norm(alpha):
        return max(tau, 1.0) * W.modulus_polynomial(abs(c) + scale_in * alpha)

    def target(x):
        x = np.asarray(x, dtype=float)
        return F.target(lo + np.mod(x - lo, tau))

    def approx(x, mu, lam):
        x = np.asarray(x, dtype=float)
        lam_u = tau * np.asarray(lam, dtype=float)
        u = (x - c) / tau
        nrm = norm_inf([np.broadcast_to(mu, x.shape), np.broadcast_to(lam_u, x.shape)], 1.0)
        prec = np.minimum(mu + 1 + p_norm(1 + nrm), PRECISION_CAP)
        frac = u - rnd(u, prec, lam_u)
        return W.approx(c + tau * frac, mu + 1, lam)

    def gen():
        f = W.generator()
        cf, tf = _frac(c), _frac(tau)
        P = modulus_poly_expr(f)
        scale_f = _frac(scale_in)
        p_expr = P.substitute([abs(cf) + Polynomial.variable(0, 1).scale(scale_f)]) \
            .scale(max(tf, 1))
        if not math.isfinite(float(p_expr.evaluate([3.0]))):
            raise ValueError(f"{name}: the precision polynomial of the window approximator "
                             "exceeds double range; the system cannot be simulated")
        base = (cf, 1, Fraction(2) / tf if tf < 1 else 2)
        C = _coords(base)
        x, mu, lam = _vars(3)
        N = compose(norm_inf_generator(2, 1), apply_polynomial(C, [mu, lam.scale(tf)]))
        w = _vars(4)  # x, mu, lam, norm
        rarg = _on([C, N], [(w[0] - cf).scale(1 / tf), w[1] + 1 + p_expr.substitute([1 + w[3]]),
                            w[2].scale(tf)])
        R = compose(rnd_generator(), rarg)
        z = _vars(4)  # x, mu, lam, rnd
        inner = _on([C, R], [cf + tf * ((z[0] - cf).scale(1 / tf) - z[3]), z[1] + 1, z[2]])
        return _named(compose(f, inner), name)

    return ApproxFunction(name, target, approx, exc, (None, None), gen,
                          max(W.min_lambda, 2.0 / tau))


# ---------------------------------------------------------------------------
# standard examples

def approx_sign() -> ApproxFunction:
    """The sign function, approximated by ``sg`` away from 0."""
    return ApproxFunction("sign", np.sign, sg, Exceptions((0.0,)), generator=sg_generator)


def staircase(levels=(-1.0, 0.0, 1.0), breakpoints=(-1.0, 1.0)) -> ApproxFunction:
    """Piecewise constant staircase."""
    return approx_piecewise(breakpoints, [approx_constant(v) for v in levels], "staircase")


def square_wave(period: float = 2.0) -> ApproxFunction:
    """Square wave: ``-1`` on the first half of each period and ``+1`` on the second."""
    half = period / 2.0
    body = approx_piecewise([0.0], [approx_constant(-1), approx_constant(1)], "square-window")
    return approx_periodic(body, (-half, half), "square-wave")
