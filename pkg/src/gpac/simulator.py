"""Adaptive Taylor-series integration of polynomial ODE systems.

The right-hand side of every system is compiled once into a monomial DAG:
each monomial of degree ``k >= 2`` is a parent monomial of degree ``k-1``
times a single variable, so the Taylor coefficients of all monomials follow
from one Cauchy product per node and order. Nodes of equal degree are
processed together with a vectorized product.

Multidimensional functions are evaluated by integrating the pulled-back
system ``z'(s) = p(z(s)) gamma'(s)`` along a polygonal path with unit-speed
straight segments.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .pivp import PIVP
from .polynomial import PolyMatrix

MIN_ORDER = 8
MAX_ORDER = 20
BLOWUP = 1e150
SAFETY = 0.9


class IntegrationError(RuntimeError):
    """The integrator could not reach the requested end point."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t


class SingularityError(IntegrationError):
    """Step-size underflow, blow-up or nonfinite state: a likely singularity."""


class DomainError(ValueError):
    """Evaluation point or path leaves the declared domain."""


# ---------------------------------------------------------------------------
# compiled right-hand side

class TaylorEngine:
    """Numeric Taylor-coefficient generator for ``y' = C m(y)``.

    ``m(y)`` is the vector of monomials used by the right-hand side and
    ``C`` a dense ``n x M`` coefficient matrix. One matrix is kept per input
    column so that directional systems ``sum_j v_j C_j`` are cheap to form.
    """

    def __init__(self, rhs: PolyMatrix):
        n = rhs.arity
        self.n = n
        self.d = rhs.cols
        index: dict[tuple[int, ...], int] = {(0,) * n: 0}
        parent: list[int] = [-1]
        var: list[int] = [-1]
        degree: list[int] = [0]

        def add(e):
            if e in index:
                return index[e]
            i = next(k for k, v in enumerate(e) if v)
            pe = list(e)
            pe[i] -= 1
            pi = add(tuple(pe))
            index[e] = len(parent)
            parent.append(pi)
            var.append(i)
            degree.append(sum(e))
            return index[e]

        for row in rhs:
            for p in row:
                for e, _ in p.items():
                    add(e)
        M = len(parent)
        self.num_monomials = M
        self.coeff = np.zeros((self.d, n, M))
        for i, row in enumerate(rhs):
            for j, p in enumerate(row):
                for e, c in p.items():
                    self.coeff[j, i, index[e]] += float(c)
        parent_a = np.array(parent)
        var_a = np.array(var)
        deg_a = np.array(degree)
        first = np.nonzero(deg_a == 1)[0]
        self.linear_idx = first
        self.linear_var = var_a[first]
        self.levels = []
        for k in range(2, int(deg_a.max(initial=0)) + 1):
            idx = np.nonzero(deg_a == k)[0]
            self.levels.append((idx, parent_a[idx], var_a[idx]))

    def directional(self, v: Sequence[float]) -> np.ndarray:
        return np.tensordot(np.asarray(v, dtype=float), self.coeff, axes=1)

    def start(self, C: np.ndarray, y: np.ndarray) -> _SeriesState:
        return _SeriesState(self, C, y)


class _SeriesState:
    """Taylor coefficients at one point, extended lazily one order at a time."""

    def __init__(self, engine: TaylorEngine, C: np.ndarray, y: np.ndarray):
        self.e = engine
        self.C = C
        self.Y = np.zeros((engine.n, MAX_ORDER + 2))
        self.S = np.zeros((engine.num_monomials, MAX_ORDER + 2))
        self.Y[:, 0] = y
        self.S[0, 0] = 1.0
        self.order = 0

    def extend(self, order: int) -> np.ndarray:
        e, Y, S = self.e, self.Y, self.S
        if order > Y.shape[1] - 1:
            grow = order + 2 - Y.shape[1]
            self.Y = Y = np.hstack([Y, np.zeros((Y.shape[0], grow))])
            self.S = S = np.hstack([S, np.zeros((S.shape[0], grow))])
        for k in range(self.order, order):
            S[e.linear_idx, k] = Y[e.linear_var, k]
            for idx, par, var in e.levels:
                S[idx, k] = np.einsum("ij,ij->i", S[par, : k + 1], Y[var, k::-1])
            Y[:, k + 1] = (self.C @ S[:, k]) / (k + 1)
        self.order = max(self.order, order)
        return Y[:, : order + 1]


@lru_cache(maxsize=512)
def engine_for(rhs: PolyMatrix) -> TaylorEngine:
    return TaylorEngine(rhs)


def _horner(coeffs: np.ndarray, s):
    """Evaluate the Taylor polynomial(s) with columns ``coeffs`` at offset(s) ``s``."""
    s = np.asarray(s, dtype=float)
    out = np.multiply.outer(s, np.zeros(coeffs.shape[0])) + coeffs[:, -1]
    for k in range(coeffs.shape[1] - 2, -1, -1):
        out = out * s[..., None] + coeffs[:, k]
    return out


# ---------------------------------------------------------------------------
# trajectories

@dataclass
class Trajectory:
    """Accepted steps of one integration run with dense output.

    ``err`` holds the per-step truncation estimate in the mixed absolute /
    relative sense used for step control (divided by ``max(1, |y|)``).
    """

    t: np.ndarray
    y: np.ndarray
    err: np.ndarray
    h: np.ndarray
    order: np.ndarray
    labels: tuple[str, ...] = ()
    _segments: list = field(default_factory=list, repr=False)

    @property
    def t0(self) -> float:
        return float(self.t[0])

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def final(self) -> np.ndarray:
        return self.y[-1]

    @property
    def error_estimate(self) -> float:
        return float(self.err.sum())

    @property
    def steps(self) -> int:
        return len(self.t) - 1

    def __call__(self, ts) -> np.ndarray:
        """Dense output: state at time(s) ``ts`` inside the integrated span."""
        ts = np.asarray(ts, dtype=float)
        scalar = ts.ndim == 0
        ts = np.atleast_1d(ts)
        lo, hi = sorted((self.t0, self.t_end))
        if np.any((ts < lo - 1e-12 * max(1, abs(lo))) | (ts > hi + 1e-12 * max(1, abs(hi)))):
            raise ValueError("dense output requested outside the integrated span")
        out = np.empty((len(ts), self.y.shape[1]))
        if not self._segments:
            out[:] = self.y[0]
            return out[0] if scalar else out
        forward = self.t_end >= self.t0
        starts = self.t[:-1] if forward else -self.t[:-1]
        key = ts if forward else -ts
        seg = np.clip(np.searchsorted(starts, key, side="right") - 1, 0, len(self._segments) - 1)
        for k in np.unique(seg):
            mask = seg == k
            ts_k, coeffs = self._segments[k]
            out[mask] = _horner(coeffs, ts[mask] - ts_k)
        return out[0] if scalar else out

    def dense(self, count: int) -> tuple[np.ndarray, np.ndarray]:
        ts = np.linspace(self.t0, self.t_end, count)
        return ts, self(ts)

    def to_csv(self, fh=None, dense: int | None = None) -> str | None:
        """Write ``t,y1..yn,err,h,order`` rows (accepted steps or ``dense`` points)."""
        n = self.y.shape[1]
        buf = io.StringIO() if fh is None else fh
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"y{i + 1}" for i in range(n)] + ["err", "h", "order"])
        if dense:
            ts, ys = self.dense(dense)
            for t, y in zip(ts, ys):
                w.writerow([repr(float(t))] + [repr(float(v)) for v in y] + ["", "", ""])
        else:
            for k in range(len(self.t)):
                w.writerow([repr(float(self.t[k]))] + [repr(float(v)) for v in self.y[k]]
                           + [repr(float(self.err[k])), repr(float(self.h[k])), int(self.order[k])])
        return buf.getvalue() if fh is None else None


def base_order(tol: float) -> int:
    return int(min(MAX_ORDER, max(MIN_ORDER, math.ceil(-math.log(tol) / 2) + 1)))


def _step_size(Y: np.ndarray, p: int, eps: float) -> float:
    h = math.inf
    for j in (p - 1, p):
        nrm = float(np.max(np.abs(Y[:, j])))
        if nrm > 0:
            h = min(h, (eps / nrm) ** (1.0 / (j - 1)))
    return SAFETY * h


def taylor_integrate(engine: TaylorEngine, C: np.ndarray, y0, t0: float, t1: float,
                     tol: float = 1e-10, order: int | None = None, step: float | None = None,
                     max_steps: int = 100_000, labels: tuple[str, ...] = ()) -> Trajectory:
    """Integrate ``y' = C m(y)`` from ``t0`` to ``t1``.

    With ``order`` and ``step`` both given the method runs at fixed order and
    fixed step (the last step is shortened to land on ``t1``). Otherwise the
    order adapts between 8 and 20 and the step keeps the truncation estimate
    of each step below ``tol * max(1, |y|) * |h| / max(1, |t1 - t0|)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    y = np.array(y0, dtype=float)
    t = float(t0)
    span = abs(t1 - t0)
    sign = 1.0 if t1 >= t0 else -1.0
    L = max(span, 1.0)
    ts, ys, errs, hs, orders, segments = [t], [y.copy()], [0.0], [0.0], [0], []
    fixed = order is not None and step is not None
    p0 = order if order is not None else base_order(tol)
    if p0 < 2:
        raise ValueError("order must be at least 2")
    while True:
        remaining = abs(t1 - t)
        if remaining <= 0:
            break
        if len(ts) > max_steps:
            raise IntegrationError(f"exceeded {max_steps} steps at t={t:.17g}", t)
        series = engine.start(C, y)
        scale = max(1.0, float(np.max(np.abs(y), initial=0.0)))
        eps = tol * scale / L
        if fixed:
            p = order
            Y = series.extend(p)
            h = float(step)
        else:
            p = p0
            Y = series.extend(p)
            h = _step_size(Y, p, eps)
            if order is None:
                while p < MAX_ORDER and h < remaining:
                    Yn = series.extend(p + 1)
                    hn = _step_size(Yn, p + 1, eps)
                    if hn / (p + 2) ** 2 <= h / (p + 1) ** 2:
                        break
                    p, Y, h = p + 1, Yn, hn
        if not np.all(np.isfinite(Y)):
            raise SingularityError(f"nonfinite Taylor coefficients at t={t:.17g}", t)
        last = h >= remaining
        if last:
            h = remaining
        elif h < 1e-13 * max(1.0, abs(t)):
            raise SingularityError(f"step size underflow (h={h:.3g}) at t={t:.17g}", t)
        hs_signed = sign * h
        y_new = _horner(Y, hs_signed)
        if not np.all(np.isfinite(y_new)) or np.max(np.abs(y_new)) > BLOWUP:
            raise SingularityError(f"solution blows up near t={t:.17g}", t)
        err = float(np.max(np.abs(Y[:, p]))) * h**p / scale
        segments.append((t, Y.copy()))
        t = float(t1) if last else t + hs_signed
        y = y_new
        ts.append(t)
        ys.append(y.copy())
        errs.append(err)
        hs.append(hs_signed)
        orders.append(p)
    return Trajectory(np.array(ts), np.array(ys), np.array(errs), np.array(hs),
                      np.array(orders), labels, segments)


# ---------------------------------------------------------------------------
# public API

def integrate(f: PIVP, t_end: float, tol: float = 1e-10, *, t0: float | None = None,
              y0=None, order: int | None = None, step: float | None = None,
              max_steps: int = 100_000) -> Trajectory:
    """Integrate a unidimensional PIVP from its base point (or ``t0``, ``y0``) to ``t_end``."""
    if f.input_dim != 1:
        raise ValueError("integrate needs a system with one input; use evaluate for d > 1")
    engine = engine_for(f.rhs)
    start = float(f.x0[0]) if t0 is None else float(t0)
    state = f.y0_float() if y0 is None else y0
    labels = tuple(f.state_label(i) for i in range(f.state_dim))
    return taylor_integrate(engine, engine.coeff[0], state, start, float(t_end), tol,
                            order, step, max_steps, labels)


def _as_point(x, d: int) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (d,):
        raise ValueError(f"expected a point with {d} coordinates, got shape {x.shape}")
    return x


def resolve_path(f: PIVP, x, path=None) -> list[np.ndarray]:
    """Waypoints from the base point to ``x``; ``path`` may omit either end."""
    d = f.input_dim
    base = _as_point(f.x0_float(), d)
    target = _as_point(x, d)
    if path is None:
        if not f.domain.straight_paths_ok:
            raise DomainError(f"domain of {f.name or 'this system'} is not declared convex; "
                              "an evaluation path is required")
        pts = [base, target]
    else:
        pts = [_as_point(p, d) for p in path]
        if not pts or np.max(np.abs(pts[0] - base)) > 0:
            pts.insert(0, base)
        if np.max(np.abs(pts[-1] - target)) > 0:
            pts.append(target)
    for p in pts:
        if not f.domain.contains(p):
            raise DomainError(f"point {p.tolist()} is outside the declared domain")
    return pts


def evaluate_state(f: PIVP, x, tol: float = 1e-10, path=None, max_steps: int = 100_000) -> np.ndarray:
    """Full state ``y(x)`` obtained by integrating along a polygonal path."""
    pts = resolve_path(f, x, path)
    engine = engine_for(f.rhs)
    y = np.array(f.y0_float())
    for a, b in zip(pts[:-1], pts[1:]):
        delta = b - a
        length = float(np.linalg.norm(delta))
        if length == 0:
            continue
        C = engine.directional(delta / length)
        y = taylor_integrate(engine, C, y, 0.0, length, tol, max_steps=max_steps).final
    return y


def evaluate(f: PIVP, x, tol: float = 1e-10, path=None) -> np.ndarray:
    """Outputs (first ``output_dim`` components) of ``f`` at the input point ``x``."""
    return evaluate_state(f, x, tol, path)[: f.output_dim]


def evaluate_line(f: PIVP, start, end, fractions, tol: float = 1e-10, path=None) -> np.ndarray:
    """Outputs at ``start + s (end - start)`` for every ``s`` in ``fractions``.

    The system is first carried from its base point to ``start`` (straight or
    along ``path``), then integrated once along the segment with dense output.
    Returns an array of shape ``(len(fractions), output_dim)``.
    """
    start = _as_point(start, f.input_dim)
    end = _as_point(end, f.input_dim)
    y = evaluate_state(f, start, tol, path)
    if not f.domain.contains(end):
        raise DomainError(f"point {end.tolist()} is outside the declared domain")
    fr = np.asarray(fractions, dtype=float)
    delta = end - start
    length = float(np.linalg.norm(delta))
    if length == 0:
        return np.tile(y[: f.output_dim], (len(fr), 1))
    engine = engine_for(f.rhs)
    traj = taylor_integrate(engine, engine.directional(delta / length), y, 0.0, length, tol)
    return traj(np.clip(fr, 0.0, 1.0) * length)[:, : f.output_dim]


@dataclass
class BoundReport:
    """Result of sampling ``|y(x)|_inf / bound(|x|_inf)`` over a range."""

    max_ratio: float
    worst_x: tuple[float, ...]
    exceedances: list[tuple[tuple[float, ...], float]]
    samples: int

    @property
    def ok(self) -> bool:
        return not self.exceedances

    def summary(self) -> str:
        status = "ok" if self.ok else f"{len(self.exceedances)} exceedance(s)"
        return (f"max ratio {self.max_ratio:.6g} at x={list(self.worst_x)} over "
                f"{self.samples} samples: {status}")


def check_bound(f: PIVP, lo, hi, tol: float = 1e-10, samples: int = 401,
                slack: float = 1e-6, seed: int = 0) -> BoundReport:
    """Spot-check the growth bound of ``f`` over an interval or box.

    For one input, trajectories run from the base point to both ends of
    ``[lo, hi]`` and are sampled densely. For several inputs, random points
    of the box (plus its corners) are evaluated along straight paths.
    """
    if f.bound is None:
        raise ValueError("system has no growth bound to check")
    xs: list[np.ndarray] = []
    states: list[np.ndarray] = []
    if f.input_dim == 1:
        lo_f, hi_f = float(np.atleast_1d(lo)[0]), float(np.atleast_1d(hi)[0])
        base = float(f.x0[0])
        for end in (lo_f, hi_f):
            if end == base:
                continue
            traj = integrate(f, end, tol)
            ts = np.concatenate([np.linspace(base, end, samples), traj.t])
            ts = ts[(ts >= min(lo_f, hi_f)) & (ts <= max(lo_f, hi_f))]
            xs.extend(ts[:, None])
            states.extend(traj(ts))
        if not xs:
            xs.append(np.array([base]))
            states.append(np.array(f.y0_float()))
    else:
        lo_a = _as_point(lo, f.input_dim)
        hi_a = _as_point(hi, f.input_dim)
        rng = np.random.default_rng(seed)
        corners = np.array(np.meshgrid(*zip(lo_a, hi_a))).reshape(f.input_dim, -1).T
        pts = np.vstack([corners, lo_a + rng.random((samples, f.input_dim)) * (hi_a - lo_a)])
        for p in pts:
            xs.append(p)
            states.append(evaluate_state(f, p, tol))
    X = np.array(xs)
    Yn = np.max(np.abs(np.array(states)), axis=1)
    B = np.asarray(f.bound.evaluate(np.max(np.abs(X), axis=1)), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(B > 0, Yn / B, np.where(Yn > 0, np.inf, 0.0))
    worst = int(np.argmax(ratio))
    bad = np.nonzero(Yn > B * (1 + slack) + tol)[0]
    return BoundReport(float(ratio[worst]), tuple(map(float, X[worst])),
                       [(tuple(map(float, X[k])), float(ratio[k])) for k in bad], len(X))


@dataclass
class ConvergenceTable:
    """Fixed-order, fixed-step errors and fitted log-log slopes."""

    orders: list[int]
    steps: list[float]
    errors: np.ndarray  # shape (len(orders), len(steps))
    mode: str

    def slopes(self) -> dict[int, float]:
        out = {}
        lh = np.log(np.asarray(self.steps))
        for i, p in enumerate(self.orders):
            keep = self.errors[i] > 0
            if keep.sum() < 2:
                out[p] = math.nan
                continue
            out[p] = float(np.polyfit(lh[keep], np.log(self.errors[i][keep]), 1)[0])
        return out

    def render(self) -> str:
        head = "order " + " ".join(f"h={h:<10.4g}" for h in self.steps) + " slope"
        lines = [head]
        sl = self.slopes()
        for i, p in enumerate(self.orders):
            lines.append(f"{p:5d} " + " ".join(f"{e:<12.4e}" for e in self.errors[i])
                         + f" {sl[p]:.3f}")
        return "\n".join(lines)


def convergence_probe(f: PIVP, t_end: float | None, orders: Sequence[int],
                      steps: Sequence[float], mode: str = "local",
                      reference_tol: float = 1e-14) -> ConvergenceTable:
    """Measure the integrator's convergence at fixed orders and step sizes.

    ``mode="local"`` takes one step of each size from the base point and
    compares with a high-accuracy reference; the error then scales like
    ``h^(order+1)``. ``mode="global"`` integrates to ``t_end`` with a fixed
    step and scales like ``h^order``.
    """
    base = float(f.x0[0])
    errors = np.zeros((len(orders), len(steps)))
    for j, h in enumerate(steps):
        target = base + h if mode == "local" else float(t_end)
        ref = integrate(f, target, reference_tol).final
        for i, p in enumerate(orders):
            got = integrate(f, target, order=p, step=h).final
            errors[i, j] = float(np.max(np.abs(got - ref)))
    if mode not in ("local", "global"):
        raise ValueError("mode must be 'local' or 'global'")
    return ConvergenceTable(list(orders), list(steps), errors, mode)
