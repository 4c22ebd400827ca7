"""Shared fixtures and random generators for the test suite."""
from __future__ import annotations

import math
import re
from fractions import Fraction

import numpy as np
import pytest

from gpac.bounds import BoundExpr
from gpac.pivp import PIVP, DomainDecl
from gpac.polynomial import Coefficient, PolyMatrix, Polynomial

UNARY = ("exp", "sin", "cos", "tanh", "arctan")


def random_coefficient(rng: np.random.Generator) -> Coefficient:
    num = int(rng.integers(-50, 51)) or 1
    den = int(rng.integers(1, 30))
    return Coefficient(Fraction(num, den), pi=int(rng.integers(-2, 3)) if rng.random() < 0.3 else 0,
                       e=int(rng.integers(-2, 3)) if rng.random() < 0.3 else 0)


def random_polynomial(rng: np.random.Generator, arity: int, terms: int = 3,
                      max_deg: int = 3) -> Polynomial:
    p = Polynomial.zero(arity)
    for _ in range(terms):
        mono = Polynomial.constant(random_coefficient(rng), arity)
        for i in range(arity):
            k = int(rng.integers(0, max_deg + 1))
            if k:
                mono = mono * Polynomial.variable(i, arity) ** k
        p = p + mono
    return p


def random_bound(rng: np.random.Generator, depth: int = 2) -> BoundExpr:
    a = BoundExpr.identity()
    if depth == 0:
        return a if rng.random() < 0.5 else BoundExpr.const(Fraction(int(rng.integers(1, 9)), 3))
    kind = rng.choice(["add", "mul", "max", "pow", "exp", "compose"])
    x, y = random_bound(rng, depth - 1), random_bound(rng, depth - 1)
    if kind == "add":
        return x + y
    if kind == "mul":
        return x * y
    if kind == "max":
        return BoundExpr.maximum(x, y)
    if kind == "pow":
        return x ** int(rng.integers(0, 4))
    if kind == "exp":
        return x.exp()
    return x.compose(y)


def random_pivp(rng: np.random.Generator) -> PIVP:
    n = int(rng.integers(1, 4))
    d = int(rng.integers(1, 3))
    rows = [[random_polynomial(rng, n, int(rng.integers(0, 4))) for _ in range(d)]
            for _ in range(n)]
    x0 = tuple(random_coefficient(rng) for _ in range(d))
    y0 = tuple(random_coefficient(rng) for _ in range(n))
    bound = random_bound(rng) if rng.random() < 0.7 else None
    domain = DomainDecl("path_required") if d > 1 and rng.random() < 0.5 else DomainDecl()
    return PIVP(PolyMatrix(rows, n), x0, y0, int(rng.integers(1, n + 1)), bound, domain)


def random_expression(rng: np.random.Generator, depth: int = 3) -> str:
    """Random expression in ``t`` over the elementary builtins.

    Division only appears with a denominator that stays positive, so every
    expression is defined on the whole line.
    """
    if depth == 0 or rng.random() < 0.2:
        r = rng.random()
        if r < 0.6:
            return "t"
        if r < 0.8:
            return str(int(rng.integers(1, 5)))
        return f"{int(rng.integers(1, 9))}/{int(rng.integers(2, 9))}"
    r = rng.random()
    sub = random_expression(rng, depth - 1)
    if r < 0.45:
        fn = UNARY[int(rng.integers(0, len(UNARY)))]
        if fn == "exp":
            sub = f"sin({sub})"
        return f"{fn}({sub})"
    if r < 0.85:
        op = ["+", "-", "*"][int(rng.integers(0, 3))]
        return f"({sub} {op} {random_expression(rng, depth - 1)})"
    return f"1/(1 + ({sub})^2)"


def reference_function(source: str):
    """Direct numpy evaluation of an expression produced by ``random_expression``."""
    code = re.sub(r"\b(exp|sin|cos|tanh|arctan)\(", r"np.\1(", source.replace("^", "**"))
    return lambda t: eval(code, {"np": np, "t": t, "math": math})


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
