"""Growth-bound expressions: nondecreasing functions of ``alpha >= 0``.

A bound is a small expression tree over one variable ``alpha`` built from
constants, sums, products, maxima, composition, ``exp`` and integer powers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .polynomial import Coefficient

KINDS = ("id", "const", "add", "mul", "max", "compose", "exp", "pow")


@dataclass(frozen=True)
class BoundExpr:
    """Node of a growth-bound expression tree.

    ``kind`` is one of ``id``, ``const``, ``add``, ``mul``, ``max``,
    ``compose`` (``args[0]`` applied to ``args[1]``), ``exp`` and ``pow``
    (``args[0] ** power``).
    """

    kind: str
    args: tuple[BoundExpr, ...] = ()
    value: Coefficient | None = None
    power: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown bound node {self.kind!r}")

    # constructors ------------------------------------------------------------
    @staticmethod
    def identity() -> BoundExpr:
        return BoundExpr("id")

    @staticmethod
    def const(c) -> BoundExpr:
        c = Coefficient.coerce(c)
        if float(c) < 0:
            raise ValueError("bound constants must be nonnegative")
        return BoundExpr("const", value=c)

    def __add__(self, other: BoundExpr) -> BoundExpr:
        return BoundExpr("add", (self, other))

    def __mul__(self, other: BoundExpr) -> BoundExpr:
        return BoundExpr("mul", (self, other))

    def __pow__(self, k: int) -> BoundExpr:
        if k < 0:
            raise ValueError("bound powers must be nonnegative")
        return BoundExpr("pow", (self,), power=k)

    @staticmethod
    def maximum(*args: BoundExpr) -> BoundExpr:
        if len(args) == 1:
            return args[0]
        return BoundExpr("max", tuple(args))

    def exp(self) -> BoundExpr:
        return BoundExpr("exp", (self,))

    def compose(self, inner: BoundExpr) -> BoundExpr:
        """The bound ``alpha -> self(inner(alpha))``."""
        return BoundExpr("compose", (self, inner))

    # queries -----------------------------------------------------------------
    def __call__(self, alpha):
        return self.evaluate(alpha)

    def evaluate(self, alpha):
        """Evaluate at ``alpha`` (scalar or numpy array); overflow gives ``inf``."""
        a = np.asarray(alpha, dtype=float)
        with np.errstate(over="ignore"):
            out = self._eval(a)
        return float(out) if np.ndim(out) == 0 else out

    def _eval(self, a):
        k = self.kind
        if k == "id":
            return a
        if k == "const":
            return np.full_like(a, float(self.value))
        if k == "add":
            return sum((c._eval(a) for c in self.args[1:]), self.args[0]._eval(a))
        if k == "mul":
            out = self.args[0]._eval(a)
            for c in self.args[1:]:
                out = out * c._eval(a)
            return out
        if k == "max":
            return np.maximum.reduce([c._eval(a) for c in self.args])
        if k == "compose":
            return self.args[0]._eval(self.args[1]._eval(a))
        if k == "exp":
            return np.exp(self.args[0]._eval(a))
        return self.args[0]._eval(a) ** self.power

    def is_poly(self) -> bool:
        """True when no ``exp`` node is reachable."""
        return self.kind != "exp" and all(c.is_poly() for c in self.args)

    def is_monotone(self, hi: float = 1e3, samples: int = 2001) -> bool:
        """Sampled check that the bound is nondecreasing on ``[0, hi]``.

        Overflow to ``inf`` counts as nondecreasing as long as it persists.
        """
        v = self.evaluate(np.linspace(0.0, hi, samples))
        if np.isnan(v).any():
            return False
        with np.errstate(invalid="ignore"):
            drop = v[:-1] - v[1:]
        drop = np.where(np.isinf(v[:-1]) & np.isinf(v[1:]), 0.0, drop)
        return bool(np.all(drop <= 1e-12 * np.maximum(1.0, np.abs(v[1:]))))

    def majorant(self):
        """Polynomial with nonnegative coefficients dominating the bound on ``[0, inf)``.

        Uses ``max(u, v) <= u + v`` for nonnegative ``u, v``. Raises
        ``ValueError`` when an ``exp`` node makes this impossible.
        """
        from .polynomial import Polynomial

        k = self.kind
        if k == "id":
            return Polynomial.variable(0, 1)
        if k == "const":
            return Polynomial.constant(abs(self.value), 1)
        if k in ("add", "max"):
            out = Polynomial.zero(1)
            for c in self.args:
                out = out + c.majorant()
            return out
        if k == "mul":
            out = Polynomial.constant(1, 1)
            for c in self.args:
                out = out * c.majorant()
            return out
        if k == "pow":
            return self.args[0].majorant() ** self.power
        if k == "compose":
            return self.args[0].majorant().substitute([self.args[1].majorant()])
        raise ValueError("bound with exp has no polynomial majorant")

    # serialization -------------------------------------------------------------
    def to_json(self):
        node: dict = {"op": self.kind}
        if self.kind == "const":
            node["value"] = self.value.to_text()
        if self.kind == "pow":
            node["k"] = self.power
        if self.args:
            node["args"] = [c.to_json() for c in self.args]
        return node

    @staticmethod
    def from_json(node) -> BoundExpr:
        if not isinstance(node, dict) or "op" not in node:
            raise ValueError(f"malformed bound node {node!r}")
        kind = node["op"]
        args = tuple(BoundExpr.from_json(c) for c in node.get("args", []))
        arity = {"id": 0, "const": 0, "exp": 1, "pow": 1, "compose": 2}
        if kind in arity and len(args) != arity[kind]:
            raise ValueError(f"bound node {kind!r} needs {arity[kind]} arguments")
        if kind in ("add", "mul", "max") and len(args) < 2:
            raise ValueError(f"bound node {kind!r} needs at least 2 arguments")
        if kind == "const":
            return BoundExpr("const", value=Coefficient.from_text(str(node["value"])))
        if kind == "pow":
            return BoundExpr("pow", args, power=int(node["k"]))
        return BoundExpr(kind, args)

    def __str__(self):
        k = self.kind
        if k == "id":
            return "a"
        if k == "const":
            v = self.value
            if v.is_rational():
                r = v.rational
                return str(r.numerator) if r.denominator == 1 else f"{r.numerator}/{r.denominator}"
            return f"({v.to_text()})"
        if k == "add":
            return "(" + " + ".join(map(str, self.args)) + ")"
        if k == "mul":
            return "(" + " * ".join(map(str, self.args)) + ")"
        if k == "max":
            return "max(" + ", ".join(map(str, self.args)) + ")"
        if k == "compose":
            return f"[{self.args[0]}]o[{self.args[1]}]"
        if k == "exp":
            return f"exp({self.args[0]})"
        return f"{self.args[0]}^{self.power}"

