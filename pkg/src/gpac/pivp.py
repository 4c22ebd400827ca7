"""Polynomial initial value problems and the built-in elementary functions.

A :class:`PIVP` with ``d`` inputs and ``n`` state variables describes a
function ``y : R^d -> R^n`` through

    J_y(x) = p(y(x)),    y(x0) = y0,

where ``p`` is an ``n x d`` matrix of polynomials in the state. The first
``output_dim`` components are the function of interest. For ``d = 1`` this
is the autonomous system ``y'(t) = p(y(t))``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

from .bounds import BoundExpr
from .polynomial import Coefficient, PolyMatrix, Polynomial

SCHEMA_VERSION = 1
DOMAIN_KINDS = ("all_space", "box", "declared_convex", "path_required")


class PIVPFormatError(ValueError):
    """Raised when a serialized PIVP document cannot be parsed."""


@dataclass(frozen=True)
class DomainDecl:
    """Declared domain of a generable function.

    ``box`` domains are open: ``lo[i] < x[i] < hi[i]`` with ``None`` meaning
    unbounded on that side. ``declared_convex`` is a caller assertion that
    straight segments stay inside the domain; ``path_required`` asks the
    evaluator for an explicit polygonal path.
    """

    kind: str = "all_space"
    lo: tuple[Coefficient | None, ...] = ()
    hi: tuple[Coefficient | None, ...] = ()
    description: str = ""

    def __post_init__(self):
        if self.kind not in DOMAIN_KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == "box" and len(self.lo) != len(self.hi):
            raise ValueError("box bounds must have equal length")

    @classmethod
    def box(cls, lo: Sequence, hi: Sequence, description: str = "") -> DomainDecl:
        conv = lambda v: None if v is None else Coefficient.coerce(v)  # noqa: E731
        return cls("box", tuple(conv(v) for v in lo), tuple(conv(v) for v in hi), description)

    @property
    def straight_paths_ok(self) -> bool:
        return self.kind in ("all_space", "box", "declared_convex")

    def contains(self, x: Sequence[float]) -> bool:
        if self.kind != "box":
            return True
        if len(x) != len(self.lo):
            return False
        for v, lo, hi in zip(x, self.lo, self.hi):
            v = float(v)
            if lo is not None and not v > float(lo):
                return False
            if hi is not None and not v < float(hi):
                return False
        return True

    def to_json(self):
        node = {"kind": self.kind}
        if self.kind == "box":
            node["lo"] = [None if v is None else v.to_text() for v in self.lo]
            node["hi"] = [None if v is None else v.to_text() for v in self.hi]
        if self.description:
            node["description"] = self.description
        return node

    @classmethod
    def from_json(cls, node) -> DomainDecl:
        if node is None:
            return cls()
        kind = node.get("kind", "all_space")
        if kind == "box":
            parse = lambda v: None if v is None else Coefficient.from_text(v)  # noqa: E731
            return cls("box", tuple(parse(v) for v in node["lo"]),
                       tuple(parse(v) for v in node["hi"]), node.get("description", ""))
        return cls(kind, description=node.get("description", ""))


@dataclass(frozen=True)
class PIVP:
    """A generable function given by a polynomial initial value problem."""

    rhs: PolyMatrix
    x0: tuple[Coefficient, ...]
    y0: tuple[Coefficient, ...]
    output_dim: int = 1
    bound: BoundExpr | None = None
    domain: DomainDecl = field(default_factory=DomainDecl)
    labels: tuple[str, ...] = field(default=(), compare=False)
    trace: object = field(default=None, compare=False, repr=False)
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "x0", tuple(Coefficient.coerce(v) for v in self.x0))
        object.__setattr__(self, "y0", tuple(Coefficient.coerce(v) for v in self.y0))

    @property
    def state_dim(self) -> int:
        return len(self.y0)

    @property
    def input_dim(self) -> int:
        return len(self.x0)

    n = state_dim
    d = input_dim

    @property
    def is_poly(self) -> bool:
        """Polynomially bounded: a bound is attached and contains no ``exp``."""
        return self.bound is not None and self.bound.is_poly()

    @property
    def is_approximate(self) -> bool:
        return (any(c.approximate for c in self.y0 + self.x0)
                or any(p.is_approximate() for row in self.rhs for p in row))

    def x0_float(self):
        return [float(v) for v in self.x0]

    def y0_float(self):
        return [float(v) for v in self.y0]

    def state_label(self, i: int) -> str:
        return self.labels[i] if i < len(self.labels) else f"y{i + 1}"

    def with_(self, **changes) -> PIVP:
        return replace(self, **changes)

    def describe(self) -> str:
        lines = [f"PIVP {self.name or '<anonymous>'}: n={self.state_dim} d={self.input_dim} "
                 f"l={self.output_dim}"]
        lines.append("  x0 = (" + ", ".join(c.to_text() for c in self.x0) + ")")
        for i in range(self.state_dim):
            row = " | ".join(p.to_text() for p in self.rhs.row(i))
            label = self.state_label(i)
            note = f"   ({label})" if label != f"y{i + 1}" else ""
            lines.append(f"  y{i + 1}' = [{row}]   init {self.y0[i].to_text()}{note}")
        lines.append(f"  bound: {self.bound if self.bound is not None else 'none'}"
                     f"{' (poly)' if self.is_poly else ''}")
        lines.append(f"  domain: {self.domain.kind}"
                     + (f" ({self.domain.description})" if self.domain.description else ""))
        return "\n".join(lines)


def pivp_validate(f: PIVP) -> list[str]:
    """Structural checks; returns a list of human-readable violations."""
    out = []
    n, d = f.state_dim, f.input_dim
    if n == 0:
        out.append("state dimension must be at least 1")
    if d == 0:
        out.append("input dimension must be at least 1")
    if f.rhs.rows != n:
        out.append(f"rhs has {f.rhs.rows} rows but state dimension is {n}")
    if f.rhs.cols != d:
        out.append(f"rhs has {f.rhs.cols} columns but input dimension is {d}")
    for i, row in enumerate(f.rhs):
        for j, p in enumerate(row):
            if p.arity != n:
                out.append(f"rhs[{i}][{j}] has arity {p.arity}, expected {n}")
    if not 1 <= f.output_dim <= max(n, 1):
        out.append(f"output dimension {f.output_dim} not in 1..{n}")
    if f.domain.kind == "box":
        if len(f.domain.lo) != d:
            out.append(f"domain box has {len(f.domain.lo)} coordinates, expected {d}")
        elif not f.domain.contains(f.x0_float()):
            out.append("x0 lies outside the declared domain box")
    if f.bound is not None and not f.bound.is_monotone():
        out.append("bound is not nondecreasing on sampled [0, 1000]")
    if d == 1 and f.domain.kind == "path_required":
        out.append("unidimensional systems cannot require an evaluation path")
    return out


# ---------------------------------------------------------------------------
# builtins

def _var(i, n):
    return Polynomial.variable(i, n)


def _const(c, n):
    return Polynomial.constant(c, n)


def _ln_upper(eps: Fraction) -> Coefficient:
    """Approximate literal just above ``|ln eps|`` so the bound stays sound."""
    v = abs(math.log(eps.numerator) - math.log(eps.denominator))
    return Coefficient.approx(math.nextafter(math.nextafter(v, math.inf), math.inf))


BUILTIN_NAMES = ("exp", "sin", "cos", "tanh", "arctan", "id", "const", "inv", "ln")


def builtin(name: str, param=None) -> PIVP:
    """Built-in elementary generable function.

    ``param`` is the constant value for ``const`` and the domain margin
    ``eps > 0`` for ``inv`` and ``ln`` (which live on ``(eps, inf)`` with base
    point 1).
    """
    a = BoundExpr.identity()
    if name == "exp":
        return PIVP(PolyMatrix.column([_var(0, 1)]), (0,), (1,), 1, a.exp(),
                    labels=("exp",), name="exp")
    if name == "sin":
        rhs = PolyMatrix.column([_var(1, 2), -_var(0, 2)])
        return PIVP(rhs, (0,), (0, 1), 1, BoundExpr.const(1), labels=("sin", "cos"), name="sin")
    if name == "cos":
        rhs = PolyMatrix.column([-_var(1, 2), _var(0, 2)])
        return PIVP(rhs, (0,), (1, 0), 1, BoundExpr.const(1), labels=("cos", "sin"), name="cos")
    if name == "tanh":
        rhs = PolyMatrix.column([1 - _var(0, 1) ** 2])
        return PIVP(rhs, (0,), (0,), 1, BoundExpr.const(1), labels=("tanh",), name="tanh")
    if name == "arctan":
        y2, y3 = _var(1, 3), _var(2, 3)
        rhs = PolyMatrix.column([y2, -2 * y3 * y2**2, _const(1, 3)])
        bound = BoundExpr.maximum(a, BoundExpr.const(Coefficient(Fraction(1, 2), pi=1)))
        return PIVP(rhs, (0,), (0, 1, 0), 1, bound, labels=("arctan", "1/(1+t^2)", "t"),
                    name="arctan")
    if name == "id":
        return PIVP(PolyMatrix.column([_const(1, 1)]), (0,), (0,), 1, a, labels=("t",), name="id")
    if name == "const":
        c = Coefficient.coerce(0 if param is None else _exact(param))
        return PIVP(PolyMatrix.column([Polynomial.zero(1)]), (0,), (c,), 1,
                    BoundExpr.const(abs(c)), labels=("c",), name=f"const({c.to_text()})")
    if name in ("inv", "ln"):
        if param is None:
            raise ValueError(f"builtin {name} needs a domain margin eps > 0")
        eps = _exact(param)
        if eps <= 0:
            raise ValueError(f"builtin {name} needs eps > 0, got {eps}")
        dom = DomainDecl.box([eps], [None], f"({eps}, inf)")
        inv_bound = BoundExpr.const(1 / eps)
        if name == "inv":
            rhs = PolyMatrix.column([-_var(0, 1) ** 2])
            return PIVP(rhs, (1,), (1,), 1, inv_bound, dom, labels=("1/t",), name=f"inv({eps})")
        rhs = PolyMatrix.column([_var(1, 2), -_var(1, 2) ** 2])
        bound = BoundExpr.maximum(a, BoundExpr.const(_ln_upper(eps)), inv_bound)
        return PIVP(rhs, (1,), (0, 1), 1, bound, dom, labels=("ln", "1/t"), name=f"ln({eps})")
    raise ValueError(f"unknown builtin {name!r}; expected one of {', '.join(BUILTIN_NAMES)}")


def exp_tower(n: int) -> PIVP:
    """The ``n``-variable system ``y_k' = y_1 ... y_k``, ``y(0) = 1``.

    Its last component is an ``n``-fold tower of exponentials, the standard
    example of a generable function without a polynomial bound.
    """
    polys = []
    prod = Polynomial.constant(1, n)
    for k in range(n):
        prod = prod * _var(k, n)
        polys.append(prod)
    bound = BoundExpr.identity()
    for _ in range(n):
        bound = bound.exp()
    return PIVP(PolyMatrix.column(polys), (0,), (1,) * n, n, bound, name=f"exp_tower({n})")


def _exact(v) -> Fraction:
    if isinstance(v, Coefficient):
        return v.rational
    if isinstance(v, float):
        return Fraction(str(v))
    return Fraction(v)


# ---------------------------------------------------------------------------
# serialization

def pivp_to_json(f: PIVP) -> dict:
    doc = {
        "version": SCHEMA_VERSION,
        "n": f.state_dim,
        "d": f.input_dim,
        "l": f.output_dim,
        "x0": [c.to_text() for c in f.x0],
        "y0": [c.to_text() for c in f.y0],
        "rhs": [[p.to_text() for p in row] for row in f.rhs],
        "bound": None if f.bound is None else f.bound.to_json(),
        "domain": f.domain.to_json(),
    }
    if f.name:
        doc["name"] = f.name
    if f.labels:
        doc["labels"] = list(f.labels)
    if f.trace is not None and hasattr(f.trace, "to_json"):
        doc["trace"] = f.trace.to_json()
    return doc


def pivp_serialize(f: PIVP) -> str:
    return json.dumps(pivp_to_json(f), indent=1, ensure_ascii=False)


def pivp_from_json(doc) -> PIVP:
    if not isinstance(doc, dict):
        raise PIVPFormatError("PIVP document must be a JSON object")
    if doc.get("version") != SCHEMA_VERSION:
        raise PIVPFormatError(f"unsupported PIVP schema version {doc.get('version')!r}")
    for key in ("n", "d", "l", "x0", "y0", "rhs"):
        if key not in doc:
            raise PIVPFormatError(f"PIVP document is missing field {key!r}")
    n, d = int(doc["n"]), int(doc["d"])
    try:
        rows = doc["rhs"]
        if len(rows) != n or any(len(r) != d for r in rows):
            raise PIVPFormatError(f"field 'rhs' must be a {n}x{d} array")
        rhs = PolyMatrix([[Polynomial.from_text(s, n) for s in r] for r in rows], n)
        x0 = tuple(Coefficient.from_text(s) for s in doc["x0"])
        y0 = tuple(Coefficient.from_text(s) for s in doc["y0"])
        bound = None if doc.get("bound") is None else BoundExpr.from_json(doc["bound"])
        domain = DomainDecl.from_json(doc.get("domain"))
    except PIVPFormatError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise PIVPFormatError(f"malformed PIVP document: {exc}") from exc
    trace = None
    if doc.get("trace") is not None:
        from .closure import ClosureTrace
        trace = ClosureTrace.from_json(doc["trace"])
    f = PIVP(rhs, x0, y0, int(doc["l"]), bound, domain, tuple(doc.get("labels", ())),
             trace, doc.get("name", ""))
    problems = pivp_validate(f)
    if problems:
        raise PIVPFormatError("invalid PIVP: " + "; ".join(problems))
    return f


def pivp_deserialize(text: str) -> PIVP:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PIVPFormatError(f"not valid JSON: {exc}") from exc
    return pivp_from_json(doc)
