"""Closure operations: compilers from PIVPs to PIVPs.

Every operation builds the polynomial system of a combined function out of
the systems of its operands. State variables of the result are laid out with
the output variables first (so the first ``output_dim`` components are the
function), followed by the operands' carried state. A :class:`ClosureTrace`
records where every result variable came from.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .bounds import BoundExpr
from .pivp import PIVP, DomainDecl, pivp_validate
from .polynomial import Coefficient, PolyMatrix, Polynomial


class ClosureError(ValueError):
    """Operands do not satisfy the preconditions of a closure operation."""


# ---------------------------------------------------------------------------
# provenance

@dataclass
class ClosureTrace:
    """Provenance of the state variables of a generated system.

    ``provenance[i]`` is ``(source, role, index)``: which operand (or ``new``)
    the result variable ``i`` comes from, its role (``carried``, ``sum``,
    ``product``, ``reciprocal``, ``composed``, ...), and the index inside the
    operand's state.
    """

    operation: str
    operands: list[str]
    provenance: list[tuple[str, str, int]]
    children: list[ClosureTrace | None] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_json(self):
        return {
            "operation": self.operation,
            "operands": list(self.operands),
            "provenance": [list(p) for p in self.provenance],
            "children": [None if c is None else c.to_json() for c in self.children],
            "notes": list(self.notes),
        }

    @classmethod
    def from_json(cls, node) -> ClosureTrace:
        return cls(node["operation"], list(node["operands"]),
                   [(str(a), str(b), int(c)) for a, b, c in node["provenance"]],
                   [None if c is None else cls.from_json(c) for c in node.get("children", [])],
                   list(node.get("notes", [])))

    def render(self, indent: int = 0) -> str:
        pad = "  " * indent
        lines = [f"{pad}{self.operation}({', '.join(self.operands)})"]
        for note in self.notes:
            lines.append(f"{pad}  note: {note}")
        for i, (src, role, k) in enumerate(self.provenance):
            lines.append(f"{pad}  y{i + 1} <- {src}[{k + 1}] ({role})" if k >= 0
                         else f"{pad}  y{i + 1} <- {role}")
        for c in self.children:
            if c is not None:
                lines.append(c.render(indent + 1))
        return "\n".join(lines)


def _summary(f: PIVP) -> str:
    return f"{f.name or 'f'}[n={f.state_dim},d={f.input_dim},l={f.output_dim}]"


def _trace(op, operands, provenance, notes=()):
    return ClosureTrace(op, [_summary(f) for f in operands], provenance,
                        [f.trace for f in operands], list(notes))


# ---------------------------------------------------------------------------
# helpers

def _shift(p: Polynomial, offset: int, n_total: int) -> Polynomial:
    return p.embed(list(range(offset, offset + p.arity)), n_total)


def _shifted_rows(f: PIVP, offset: int, n_total: int) -> list[list[Polynomial]]:
    return [[_shift(p, offset, n_total) for p in row] for row in f.rhs]


def _require_same_shape(f: PIVP, g: PIVP, op: str):
    if f.input_dim != g.input_dim:
        raise ClosureError(f"{op}: input dimensions differ ({f.input_dim} vs {g.input_dim})")
    if f.output_dim != g.output_dim:
        raise ClosureError(f"{op}: output dimensions differ ({f.output_dim} vs {g.output_dim})")
    if f.x0 != g.x0:
        raise ClosureError(f"{op}: operands have different base points "
                           f"{[c.to_text() for c in f.x0]} and {[c.to_text() for c in g.x0]}; "
                           "rebase one operand first")


def _intersect_domains(f: PIVP, g: PIVP) -> DomainDecl:
    a, b = f.domain, g.domain
    if a == b or b.kind == "all_space":
        return a
    if a.kind == "all_space":
        return b
    if a.kind == "box" and b.kind == "box":
        lo = [x if y is None or (x is not None and float(x) >= float(y)) else y
              for x, y in zip(a.lo, b.lo)]
        hi = [x if y is None or (x is not None and float(x) <= float(y)) else y
              for x, y in zip(a.hi, b.hi)]
        return DomainDecl("box", tuple(lo), tuple(hi), "intersection")
    if "path_required" in (a.kind, b.kind):
        return DomainDecl("path_required", description="intersection of operand domains")
    return DomainDecl("declared_convex", description="intersection of operand domains")


def _same_point(a: Sequence[Coefficient], b: Sequence[Coefficient]) -> bool:
    return len(a) == len(b) and all(x == y for x, y in zip(a, b))


def initial_state(f: PIVP, point: Sequence[Coefficient], tol: float = 1e-14,
                  path=None) -> tuple[Coefficient, ...]:
    """State of ``f`` at ``point``: exact at the base point, else simulated.

    Simulated values are stored as approximate coefficients.
    """
    point = tuple(Coefficient.coerce(c) for c in point)
    if _same_point(point, f.x0):
        return f.y0
    from .simulator import evaluate_state
    try:
        y = evaluate_state(f, [float(c) for c in point], tol, path)
    except Exception as exc:  # surfaced as a closure failure
        raise ClosureError(f"cannot evaluate {f.name or 'operand'} at "
                           f"{[float(c) for c in point]}: {exc}") from exc
    return tuple(Coefficient.approx(v) for v in y)


def _labels(prefix_labels, *groups):
    out = list(prefix_labels)
    for tag, f in groups:
        out.extend(f"{tag}.{f.state_label(i)}" for i in range(f.state_dim))
    return tuple(out)


def _carried(tag: str, f: PIVP):
    return [(tag, "carried", i) for i in range(f.state_dim)]


# ---------------------------------------------------------------------------
# arithmetic

def combine(f: PIVP, g: PIVP, op: str = "add") -> PIVP:
    """Componentwise sum or difference of two generable functions.

    State: ``(s, y_f, y_g)`` with ``s_i = f_i +- g_i`` and Jacobian rows the
    sum or difference of the operands' output rows. Bound ``sp_f + sp_g``.
    """
    if op not in ("add", "sub"):
        raise ClosureError(f"combine: unknown operation {op!r}")
    _require_same_shape(f, g, "combine")
    sign = 1 if op == "add" else -1
    l, nf, ng, d = f.output_dim, f.state_dim, g.state_dim, f.input_dim
    n = l + nf + ng
    rf = _shifted_rows(f, l, n)
    rg = _shifted_rows(g, l + nf, n)
    rows = [[rf[i][j] + rg[i][j] * sign for j in range(d)] for i in range(l)] + rf + rg
    y0 = tuple(f.y0[i] + g.y0[i] * sign for i in range(l)) + f.y0 + g.y0
    bound = f.bound + g.bound if f.bound is not None and g.bound is not None else None
    sym = "+" if sign > 0 else "-"
    prov = [("new", "sum" if sign > 0 else "difference", i) for i in range(l)]
    prov += _carried("f", f) + _carried("g", g)
    return PIVP(PolyMatrix(rows, n), f.x0, y0, l, bound, _intersect_domains(f, g),
                _labels([f"{sym}{i + 1}" for i in range(l)], ("f", f), ("g", g)),
                _trace("combine:" + op, [f, g], prov), f"({f.name}{sym}{g.name})")


def multiply(f: PIVP, g: PIVP) -> PIVP:
    """Componentwise product ``z_i = y_i ybar_i`` of two generable functions.

    ``dz_i = p_i(y) ybar_i + y_i pbar_i(ybar)``; bound ``max(sp, sp_g, sp sp_g)``.
    """
    _require_same_shape(f, g, "multiply")
    l, nf, ng, d = f.output_dim, f.state_dim, g.state_dim, f.input_dim
    n = l + nf + ng
    rf = _shifted_rows(f, l, n)
    rg = _shifted_rows(g, l + nf, n)
    rows = []
    for i in range(l):
        yi = Polynomial.variable(l + i, n)
        gi = Polynomial.variable(l + nf + i, n)
        rows.append([rf[i][j] * gi + yi * rg[i][j] for j in range(d)])
    rows += rf + rg
    y0 = tuple(f.y0[i] * g.y0[i] for i in range(l)) + f.y0 + g.y0
    bound = None
    if f.bound is not None and g.bound is not None:
        bound = BoundExpr.maximum(f.bound, g.bound, f.bound * g.bound)
    prov = [("new", "product", i) for i in range(l)] + _carried("f", f) + _carried("g", g)
    return PIVP(PolyMatrix(rows, n), f.x0, y0, l, bound, _intersect_domains(f, g),
                _labels([f"*{i + 1}" for i in range(l)], ("f", f), ("g", g)),
                _trace("multiply", [f, g], prov), f"({f.name}*{g.name})")


def reciprocal(f: PIVP) -> PIVP:
    """``1/f`` for a scalar generable function with nonzero base value.

    ``dg = -p_1(y) g^2``. The growth bound depends on how close ``f`` gets to
    zero, which the system does not expose, so no bound is attached.
    """
    if f.output_dim != 1:
        raise ClosureError("reciprocal: operand must have a single output")
    if f.y0[0].is_zero() or float(f.y0[0]) == 0.0:
        raise ClosureError("reciprocal: zero initial value")
    nf, d = f.state_dim, f.input_dim
    n = 1 + nf
    rf = _shifted_rows(f, 1, n)
    g = Polynomial.variable(0, n)
    rows = [[-(rf[0][j] * g * g) for j in range(d)]] + rf
    y0 = (f.y0[0].inverse(),) + f.y0
    prov = [("new", "reciprocal", 0)] + _carried("f", f)
    return PIVP(PolyMatrix(rows, n), f.x0, y0, 1, None, f.domain,
                _labels(["1/f"], ("f", f)), _trace("reciprocal", [f], prov), f"1/{f.name}")


def compose(f: PIVP, g: PIVP, tol: float = 1e-12, path=None) -> PIVP:
    """``f o g`` where the outputs of ``g`` are the inputs of ``f``.

    State ``(h, ybar)`` with ``dh = p(h) pbar_{1..m}(ybar)``. The initial value
    ``h = y_f(g(xbar0))`` is exact when ``g(xbar0)`` is the base point of
    ``f``; otherwise it is simulated at ``tol / 100`` (along ``path`` if given)
    and flagged approximate. Bound ``max(sp_g, sp_f o sp_g)``.
    """
    m = f.input_dim
    if g.output_dim != m:
        raise ClosureError(f"compose: inner function has {g.output_dim} outputs but the outer "
                           f"function takes {m} inputs")
    nf, ng, d = f.state_dim, g.state_dim, g.input_dim
    n = nf + ng
    rf = _shifted_rows(f, 0, n)
    rg = _shifted_rows(g, nf, n)
    rows = []
    for i in range(nf):
        rows.append([sum((rf[i][k] * rg[k][j] for k in range(m)), Polynomial.zero(n))
                     for j in range(d)])
    rows += rg
    inner = g.y0[:m]
    notes = []
    h0 = initial_state(f, inner, tol / 100, path)
    if not _same_point(inner, f.x0):
        notes.append("initial value of the outer system simulated (approximate)")
    bound = None
    if f.bound is not None and g.bound is not None:
        bound = BoundExpr.maximum(g.bound, f.bound.compose(g.bound))
    prov = [("f", "composed", i) for i in range(nf)] + _carried("g", g)
    return PIVP(PolyMatrix(rows, n), g.x0, h0 + g.y0, f.output_dim, bound, g.domain,
                _labels([], ("f", f), ("g", g)), _trace("compose", [f, g], prov, notes),
                f"{f.name}({g.name})")


def ode_rewrite(f: PIVP, y0: Sequence, t0=0, tol: float = 1e-12,
                solution_bound: BoundExpr | None = None, path=None) -> PIVP:
    """Solve ``y' = f(y)``, ``y(t0) = y0`` for a generable vector field ``f``.

    State ``(y, u)`` with ``y' = u_{1..d}`` and ``u' = p(u) u_{1..d}``, where
    ``u = w(y)`` is the generator state of ``f``. ``u(t0) = w(y0)`` is exact
    when ``y0`` is the base point of ``f``. The bound of the solution is not
    known in advance; pass ``solution_bound`` to attach
    ``max(sb, sp_f o sb)``.
    """
    d = f.input_dim
    if f.output_dim != d:
        raise ClosureError(f"ode_rewrite: vector field must map R^{d} to R^{d}, "
                           f"has {f.output_dim} outputs")
    y0 = tuple(Coefficient.coerce(v) for v in y0)
    if len(y0) != d:
        raise ClosureError(f"ode_rewrite: initial value needs {d} components")
    nf = f.state_dim
    n = d + nf
    rf = _shifted_rows(f, d, n)
    rows = [[Polynomial.variable(d + i, n)] for i in range(d)]
    for i in range(nf):
        rows.append([sum((rf[i][k] * Polynomial.variable(d + k, n) for k in range(d)),
                         Polynomial.zero(n))])
    u0 = initial_state(f, y0, tol / 100, path)
    notes = [] if _same_point(y0, f.x0) else ["generator state at y0 simulated (approximate)"]
    bound = None
    if solution_bound is not None and f.bound is not None:
        bound = BoundExpr.maximum(solution_bound, f.bound.compose(solution_bound))
    prov = [("new", "solution", i) for i in range(d)] + [("f", "generator", i) for i in range(nf)]
    return PIVP(PolyMatrix(rows, n), (Coefficient.coerce(t0),), y0 + u0, d, bound,
                DomainDecl(), _labels([f"y{i + 1}" for i in range(d)], ("w", f)),
                _trace("ode_rewrite", [f], prov, notes), f"ode[{f.name}]")


def ode_rewrite_controlled(f: PIVP, control: PIVP, y0: Sequence, tol: float = 1e-12,
                           solution_bound: BoundExpr | None = None, path=None) -> PIVP:
    """Solve ``y' = f(y, x(t))`` for a control ``x`` that is itself a PIVP.

    State ``(y, u, c)``: ``c`` runs the control system, ``y' = u_{1..dy}`` and
    ``u' = p(u) (u_{1..dy}, x'(t))`` with ``x'`` replaced by the control's
    polynomial right-hand side, so the whole system stays polynomial.
    """
    if control.input_dim != 1:
        raise ClosureError("ode_rewrite_controlled: control must have one input (time)")
    dx = control.output_dim
    dy = f.input_dim - dx
    if dy < 1 or f.output_dim != dy:
        raise ClosureError(f"ode_rewrite_controlled: vector field must map R^{dy}xR^{dx} to "
                           f"R^{dy}, got {f.input_dim} inputs and {f.output_dim} outputs")
    y0 = tuple(Coefficient.coerce(v) for v in y0)
    if len(y0) != dy:
        raise ClosureError(f"ode_rewrite_controlled: initial value needs {dy} components")
    nf, nc = f.state_dim, control.state_dim
    n = dy + nf + nc
    rf = _shifted_rows(f, dy, n)
    rc = _shifted_rows(control, dy + nf, n)
    rows = [[Polynomial.variable(dy + i, n)] for i in range(dy)]
    for i in range(nf):
        acc = Polynomial.zero(n)
        for k in range(dy):
            acc = acc + rf[i][k] * Polynomial.variable(dy + k, n)
        for k in range(dx):
            acc = acc + rf[i][dy + k] * rc[k][0]
        rows.append([acc])
    rows += rc
    point = y0 + control.y0[:dx]
    u0 = initial_state(f, point, tol / 100, path)
    notes = [] if _same_point(point, f.x0) else ["generator state simulated (approximate)"]
    bound = None
    if solution_bound is not None and f.bound is not None and control.bound is not None:
        inner = BoundExpr.maximum(solution_bound, control.bound)
        bound = BoundExpr.maximum(inner, f.bound.compose(inner))
    prov = ([("new", "solution", i) for i in range(dy)] + [("f", "generator", i) for i in range(nf)]
            + _carried("control", control))
    return PIVP(PolyMatrix(rows, n), control.x0, y0 + u0 + control.y0, dy, bound, DomainDecl(),
                _labels([f"y{i + 1}" for i in range(dy)], ("w", f), ("x", control)),
                _trace("ode_rewrite_controlled", [f, control], prov, notes),
                f"ode[{f.name}; {control.name}]")


# ---------------------------------------------------------------------------
# polynomial maps and bookkeeping

def coordinates(d: int, base: Sequence = None) -> PIVP:
    """The identity map of ``R^d`` as a generable function based at ``base``."""
    base = tuple(Coefficient.coerce(v) for v in (base if base is not None else (0,) * d))
    rows = [[Polynomial.constant(1 if i == j else 0, d) for j in range(d)] for i in range(d)]
    return PIVP(PolyMatrix(rows, d), base, base, d, BoundExpr.identity(),
                labels=tuple(f"x{i + 1}" for i in range(d)),
                trace=ClosureTrace("coordinates", [], [("input", "coordinate", i)
                                                       for i in range(d)]),
                name="x" if d == 1 else f"x[{d}]")


def polynomial_bound(polys: Sequence[Polynomial], inner: BoundExpr) -> BoundExpr:
    """``sigma * max(1, inner)^deg`` over a family of polynomials."""
    deg = max((p.degree for p in polys), default=0)
    if all(c.is_rational() for p in polys for c in p.terms.values()):
        sig = max((sum((abs(c.rational) for c in p.terms.values()), Fraction(0))
                   for p in polys), default=Fraction(0))
    else:
        sigma = max((p.sigma for p in polys), default=0.0)
        sig = Fraction(sigma).limit_denominator(10**12)
        if sig < sigma:
            sig += Fraction(1, 10**12)
    one = BoundExpr.const(1)
    return BoundExpr.const(sig) * (BoundExpr.maximum(one, inner) ** deg)


def apply_polynomial(g: PIVP, polys: Sequence[Polynomial], name: str = "") -> PIVP:
    """Apply a polynomial map to the outputs of ``g``, exactly.

    ``polys`` are polynomials in ``g.output_dim`` variables. The new variables
    ``v_k = P_k(ybar)`` have Jacobian rows ``sum_i dP_k/dy_i(ybar) pbar_i``,
    and their initial values are exact.
    """
    m = g.output_dim
    polys = [p.pad(m) if p.arity < m else p for p in polys]
    if any(p.arity != m for p in polys):
        raise ClosureError(f"apply_polynomial: polynomials must have arity {m}")
    ng, d = g.state_dim, g.input_dim
    k = len(polys)
    n = k + ng
    rg = _shifted_rows(g, k, n)
    outs = list(range(k, k + m))
    rows = []
    for P in polys:
        grads = [P.partial(i).embed(outs, n) for i in range(m)]
        rows.append([sum((grads[i] * rg[i][j] for i in range(m)), Polynomial.zero(n))
                     for j in range(d)])
    rows += rg
    y0 = tuple(P.evaluate_exact(g.y0[:m]) for P in polys) + g.y0
    bound = None
    if g.bound is not None:
        bound = BoundExpr.maximum(g.bound, polynomial_bound(polys, g.bound))
    prov = [("new", "polynomial", i) for i in range(k)] + _carried("g", g)
    label = name or f"P({g.name})"
    return PIVP(PolyMatrix(rows, n), g.x0, y0, k, bound, g.domain,
                _labels([f"P{i + 1}" for i in range(k)], ("g", g)),
                _trace("apply_polynomial", [g], prov,
                       [f"P{i + 1} = {P.to_text()}" for i, P in enumerate(polys)]), label)


def poly_pivp(polys: Sequence[Polynomial] | Polynomial, base: Sequence = None) -> PIVP:
    """A polynomial map ``R^d -> R^k`` as a generable function."""
    polys = [polys] if isinstance(polys, Polynomial) else list(polys)
    d = max(p.arity for p in polys)
    return apply_polynomial(coordinates(d, base), polys,
                            name=", ".join(p.to_text("x") for p in polys))


def stack(fs: Sequence[PIVP]) -> PIVP:
    """Concatenate the outputs of several functions of the same input."""
    fs = list(fs)
    if not fs:
        raise ClosureError("stack: need at least one operand")
    for g in fs[1:]:
        if g.input_dim != fs[0].input_dim or g.x0 != fs[0].x0:
            raise ClosureError("stack: operands need the same inputs and base point")
    l = sum(f.output_dim for f in fs)
    n = sum(f.state_dim for f in fs)
    out_pos, rest_pos = 0, l
    mapping = []
    for f in fs:
        idx = list(range(out_pos, out_pos + f.output_dim))
        idx += list(range(rest_pos, rest_pos + f.state_dim - f.output_dim))
        out_pos += f.output_dim
        rest_pos += f.state_dim - f.output_dim
        mapping.append(idx)
    rows: list = [None] * n
    y0: list = [None] * n
    labels: list = [None] * n
    prov: list = [None] * n
    for t, (f, idx) in enumerate(zip(fs, mapping)):
        for i, row in enumerate(f.rhs):
            rows[idx[i]] = [p.embed(idx, n) for p in row]
            y0[idx[i]] = f.y0[i]
            labels[idx[i]] = f"{t}.{f.state_label(i)}"
            prov[idx[i]] = (f"op{t}", "carried", i)
    bound = None
    if all(f.bound is not None for f in fs):
        bound = BoundExpr.maximum(*[f.bound for f in fs])
    dom = fs[0].domain
    for f in fs[1:]:
        dom = _intersect_domains(PIVP(fs[0].rhs, fs[0].x0, fs[0].y0, domain=dom), f)
    return PIVP(PolyMatrix(rows, n), fs[0].x0, tuple(y0), l, bound, dom, tuple(labels),
                _trace("stack", fs, prov), "[" + ", ".join(f.name for f in fs) + "]")


def select_outputs(f: PIVP, indices: Sequence[int]) -> PIVP:
    """Reorder the state so that ``indices`` become the outputs."""
    indices = list(indices)
    rest = [i for i in range(f.state_dim) if i not in indices]
    order = indices + rest
    pos = {old: new for new, old in enumerate(order)}
    n = f.state_dim
    mapping = [pos[i] for i in range(n)]
    rows = [[p.embed(mapping, n) for p in f.rhs.row(old)] for old in order]
    prov = [("f", "carried", old) for old in order]
    return PIVP(PolyMatrix(rows, n), f.x0, tuple(f.y0[i] for i in order), len(indices),
                f.bound, f.domain, tuple(f.state_label(i) for i in order),
                _trace("select_outputs", [f], prov), f.name)


def rebase(f: PIVP, x0: Sequence, tol: float = 1e-14, path=None) -> PIVP:
    """Move the base point of ``f`` to ``x0`` (state simulated, flagged approximate)."""
    x0 = tuple(Coefficient.coerce(v) for v in x0)
    if len(x0) != f.input_dim:
        raise ClosureError(f"rebase: need {f.input_dim} coordinates")
    y0 = initial_state(f, x0, tol, path)
    prov = _carried("f", f)
    notes = [] if _same_point(x0, f.x0) else ["state at the new base point simulated"]
    return PIVP(f.rhs, x0, y0, f.output_dim, f.bound, f.domain, f.labels,
                _trace("rebase", [f], prov, notes), f.name)


def freeze(f: PIVP, values: dict[int, object], tol: float = 1e-14, path=None) -> PIVP:
    """Fix some inputs to constants, keeping the remaining ones free.

    The system is first rebased to the point where the frozen coordinates take
    their values, then the matching Jacobian columns are dropped.
    """
    if not values:
        return f
    point = list(f.x0)
    for i, v in values.items():
        point[i] = Coefficient.coerce(v)
    g = rebase(f, point, tol, path)
    keep = [j for j in range(f.input_dim) if j not in values]
    if not keep:
        raise ClosureError("freeze: at least one input must stay free")
    rows = [[row[j] for j in keep] for row in g.rhs]
    dom = f.domain
    if dom.kind == "box":
        dom = DomainDecl("box", tuple(dom.lo[j] for j in keep), tuple(dom.hi[j] for j in keep),
                         dom.description)
    params = ", ".join(f"x{i + 1}={Coefficient.coerce(v).to_text()}" for i, v in values.items())
    return PIVP(PolyMatrix(rows, f.state_dim), tuple(point[j] for j in keep), g.y0,
                f.output_dim, f.bound, dom, f.labels,
                _trace("freeze", [f], _carried("f", f), [params]), f"{f.name}|{params}")


def with_bound(f: PIVP, bound: BoundExpr | None) -> PIVP:
    """Attach (or replace) a growth bound asserted by the caller."""
    return f.with_(bound=bound)


def with_domain(f: PIVP, domain: DomainDecl) -> PIVP:
    return f.with_(domain=domain)


def scale(f: PIVP, c) -> PIVP:
    """Multiply every output by the constant ``c``."""
    l = f.output_dim
    polys = [Polynomial.variable(i, l).scale(c) for i in range(l)]
    return apply_polynomial(f, polys, name=f"{Coefficient.coerce(c).to_text()}*{f.name}")


# ---------------------------------------------------------------------------
# modulus of continuity

def modulus_bound(f: PIVP) -> Callable[[Sequence[float], Sequence[float]], float]:
    """Bound on ``|f(x1) - f(x2)|_inf`` from the system's data.

    Returns the procedure ``|x1 - x2|_inf d sigma(p) max(1, sp(max |x|_inf))^deg(p)``
    where ``sigma`` and ``deg`` are maxima over the entries of the
    right-hand-side matrix.
    """
    if f.bound is None:
        raise ClosureError("modulus_bound: system has no growth bound")
    d = f.input_dim
    sigma = f.rhs.sigma
    deg = f.rhs.degree
    bound = f.bound

    def omega(x1, x2) -> float:
        a = np.atleast_1d(np.asarray(x1, dtype=float))
        b = np.atleast_1d(np.asarray(x2, dtype=float))
        dist = float(np.max(np.abs(a - b), initial=0.0))
        if dist == 0.0:
            return 0.0
        alpha = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))))
        return dist * d * sigma * max(1.0, float(bound(alpha))) ** deg

    omega.sigma = sigma
    omega.degree = deg
    omega.input_dim = d
    return omega


def modulus_polynomial_value(f: PIVP, alpha) -> np.ndarray:
    """``ceil(d sigma) max(1, sp(alpha))^deg``: a dominating polynomial in ``sp``."""
    if f.bound is None:
        raise ClosureError("system has no growth bound")
    c = float(np.ceil(f.input_dim * f.rhs.sigma))
    return c * np.maximum(1.0, f.bound(np.asarray(alpha, dtype=float))) ** f.rhs.degree


def validated(f: PIVP) -> PIVP:
    problems = pivp_validate(f)
    if problems:
        raise ClosureError("generated system is invalid: " + "; ".join(problems))
    return f
