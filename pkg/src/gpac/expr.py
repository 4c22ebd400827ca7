"""A small expression language compiled to polynomial IVPs.

Grammar (lowest to highest precedence)::

    expr   := 'let' NAME '=' expr 'in' expr | sum
    sum    := prod (('+' | '-') prod)*
    prod   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' INT)?
    atom   := NUMBER | 'pi' | 'e' | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Variables are ``t`` (one input) or ``x1, x2, ...`` (several inputs). Every
node compiles to one closure operation; polynomial subtrees compile to a
single polynomial map of the inputs.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import zoo
from .closure import (ClosureError, apply_polynomial, combine, compose, coordinates, multiply,
                      reciprocal, scale, stack)
from .pivp import PIVP, builtin
from .polynomial import Coefficient, Polynomial


class ExprError(ValueError):
    """Syntax or compilation error located at ``line``/``column`` (1-based)."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


# ---------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Expr:
    pos: tuple[int, int] = field(default=(0, 0), compare=False, kw_only=True)


@dataclass(frozen=True)
class Num(Expr):
    value: Fraction


@dataclass(frozen=True)
class Const(Expr):
    name: str  # "pi" or "e"


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class Bin(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class App(Expr):
    fn: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Let(Expr):
    name: str
    value: Expr
    body: Expr


# function name -> (arity, reference evaluator)
ELEMENTARY: dict[str, Callable] = {
    "exp": math.exp, "sin": math.sin, "cos": math.cos, "tanh": math.tanh,
    "arctan": math.atan, "ln": math.log,
}
ZOO_FUNCTIONS: dict[str, tuple[int, Callable]] = {
    "sg": (3, zoo.sg), "ip1": (3, zoo.ip1), "abs": (3, zoo.abs_), "nz": (3, zoo.nz),
    "rnd": (3, zoo.rnd), "mx": (4, zoo.mx), "mn": (4, zoo.mn),
    "lxh": (5, zoo.lxh), "hxl": (5, zoo.hxl), "clamp": (5, zoo.clamp),
}
# leading arguments that must be constant (interval end points)
CONSTANT_ARGS = {"lxh": 2, "hxl": 2, "clamp": 2}
RESERVED = {"let", "in", "pi", "e"}


def arity(fn: str) -> int:
    if fn in ELEMENTARY:
        return 1
    return ZOO_FUNCTIONS[fn][0]


# ---------------------------------------------------------------------------
# lexer and parser

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d*)?|\.\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
                    r"|(?P<op>[-+*/^(),=]))")
_VAR = re.compile(r"t|x[1-9]\d*")


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(src: str) -> list[_Tok]:
    toks = []
    line_starts = [0] + [m.end() for m in re.finditer("\n", src)]

    def where(offset):
        ln = max(i for i, s in enumerate(line_starts) if s <= offset)
        return ln + 1, offset - line_starts[ln] + 1

    i = 0
    while True:
        while i < len(src) and src[i].isspace():
            i += 1
        if i >= len(src):
            toks.append(_Tok("eof", "", *where(i)))
            return toks
        m = _TOKEN.match(src, i)
        if not m or m.end() == i:
            raise ExprError(f"unexpected character {src[i]!r}", *where(i))
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), *where(start)))
        i = m.end()


class _Parser:
    def __init__(self, src: str):
        self.toks = _tokenize(src)
        self.i = 0
        self.scope: list[str] = []

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, msg, tok=None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ExprError(f"{msg}, found {found}", tok.line, tok.col)

    def eat(self, text):
        if self.tok.text != text or self.tok.kind == "eof":
            self.fail(f"expected {text!r}")
        self.i += 1

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "eof":
            self.fail("unexpected token")
        return e

    def expr(self) -> Expr:
        t = self.tok
        if t.kind == "name" and t.text == "let":
            self.i += 1
            name_tok = self.tok
            if name_tok.kind != "name" or name_tok.text in RESERVED or _is_reserved_name(name_tok.text):
                self.fail("expected a binding name")
            self.i += 1
            self.eat("=")
            value = self.expr()
            if not (self.tok.kind == "name" and self.tok.text == "in"):
                self.fail("expected 'in'")
            self.i += 1
            self.scope.append(name_tok.text)
            body = self.expr()
            self.scope.pop()
            return Let(name_tok.text, value, body, pos=(t.line, t.col))
        return self.sum()

    def sum(self) -> Expr:
        left = self.prod()
        while self.tok.kind == "op" and self.tok.text in "+-":
            t = self.tok
            self.i += 1
            left = Bin(t.text, left, self.prod(), pos=(t.line, t.col))
        return left

    def prod(self) -> Expr:
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            t = self.tok
            self.i += 1
            left = Bin(t.text, left, self.unary(), pos=(t.line, t.col))
        return left

    def unary(self) -> Expr:
        t = self.tok
        if t.kind == "op" and t.text == "-":
            self.i += 1
            return Neg(self.unary(), pos=(t.line, t.col))
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            t = self.tok
            self.i += 1
            k = self.tok
            if k.kind != "num" or not k.text.isdigit():
                self.fail("exponent must be a nonnegative integer literal")
            self.i += 1
            return Pow(base, int(k.text), pos=(t.line, t.col))
        return base

    def atom(self) -> Expr:
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "num":
            self.i += 1
            return Num(Fraction(Decimal(t.text)), pos=pos)
        if t.kind == "op" and t.text == "(":
            self.i += 1
            e = self.expr()
            self.eat(")")
            return e
        if t.kind == "name":
            self.i += 1
            name = t.text
            if self.tok.kind == "op" and self.tok.text == "(":
                if name not in ELEMENTARY and name not in ZOO_FUNCTIONS:
                    raise ExprError(f"unknown function {name!r}", *pos)
                self.i += 1
                args = [self.expr()]
                while self.tok.kind == "op" and self.tok.text == ",":
                    self.i += 1
                    args.append(self.expr())
                self.eat(")")
                if len(args) != arity(name):
                    raise ExprError(f"{name} takes {arity(name)} argument(s), got {len(args)}",
                                    *pos)
                return App(name, tuple(args), pos=pos)
            if name in ("pi", "e"):
                return Const(name, pos=pos)
            if name in self.scope or _VAR.fullmatch(name):
                return Var(name, pos=pos)
            if name in ELEMENTARY or name in ZOO_FUNCTIONS:
                raise ExprError(f"function {name!r} needs arguments", *pos)
            raise ExprError(f"unknown identifier {name!r}", *pos)
        self.fail("expected an expression")


def _is_reserved_name(name: str) -> bool:
    return bool(_VAR.fullmatch(name)) or name in ELEMENTARY or name in ZOO_FUNCTIONS


def parse(source: str) -> Expr:
    """Parse ``source`` into an :class:`Expr`; raises :class:`ExprError`."""
    return _Parser(source).parse()


# ---------------------------------------------------------------------------
# pretty printer

_PREC = {"let": 0, "+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


def _prec(e: Expr) -> int:
    if isinstance(e, Let):
        return 0
    if isinstance(e, Bin):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 3
    if isinstance(e, Pow):
        return 4
    return 5


def _num_text(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    # parsed numbers are finite decimals, so this terminates
    return format(Decimal(v.numerator) / Decimal(v.denominator), "f")


def pretty(e: Expr) -> str:
    """Canonical text with minimal parentheses; ``parse(pretty(e)) == e``."""
    def wrap(sub, ok):
        s = pretty(sub)
        return s if ok else f"({s})"

    if isinstance(e, Num):
        return _num_text(e.value)
    if isinstance(e, (Const, Var)):
        return e.name
    if isinstance(e, Neg):
        return "-" + wrap(e.operand, _prec(e.operand) >= 3)
    if isinstance(e, Pow):
        return wrap(e.base, _prec(e.base) >= 5) + f"^{e.exponent}"
    if isinstance(e, Bin):
        p = _PREC[e.op]
        left = wrap(e.left, _prec(e.left) >= p)
        right = wrap(e.right, _prec(e.right) > p)
        return f"{left} {e.op} {right}"
    if isinstance(e, App):
        return f"{e.fn}(" + ", ".join(pretty(a) for a in e.args) + ")"
    if isinstance(e, Let):
        return f"let {e.name} = {pretty(e.value)} in {pretty(e.body)}"
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# analysis and reference interpretation

def variables(e: Expr, bound: frozenset = frozenset()) -> set[str]:
    """Free input variables of ``e``."""
    if isinstance(e, Var):
        return set() if e.name in bound else {e.name}
    if isinstance(e, (Num, Const)):
        return set()
    if isinstance(e, Neg):
        return variables(e.operand, bound)
    if isinstance(e, Pow):
        return variables(e.base, bound)
    if isinstance(e, Bin):
        return variables(e.left, bound) | variables(e.right, bound)
    if isinstance(e, App):
        return set().union(*(variables(a, bound) for a in e.args))
    if isinstance(e, Let):
        return variables(e.value, bound) | variables(e.body, bound | {e.name})
    raise TypeError(f"not an expression: {e!r}")


def input_dim(e: Expr) -> int:
    """1 for expressions in ``t`` (or constants), else the largest ``x`` index."""
    vs = variables(e)
    if "t" in vs and len(vs) > 1:
        raise ExprError("cannot mix t with x1, x2, ...")
    idx = [int(v[1:]) for v in vs if v != "t"]
    return max(idx, default=1)


def _var_index(name: str) -> int:
    return 0 if name == "t" else int(name[1:]) - 1


def interpret(e: Expr, point: Sequence[float], env: dict | None = None) -> float:
    """Evaluate ``e`` directly with floating-point library functions."""
    env = env or {}
    pt = np.atleast_1d(np.asarray(point, dtype=float))
    if isinstance(e, Num):
        return float(e.value)
    if isinstance(e, Const):
        return math.pi if e.name == "pi" else math.e
    if isinstance(e, Var):
        if e.name in env:
            return env[e.name]
        return float(pt[_var_index(e.name)])
    if isinstance(e, Neg):
        return -interpret(e.operand, pt, env)
    if isinstance(e, Pow):
        return interpret(e.base, pt, env) ** e.exponent
    if isinstance(e, Bin):
        a, b = interpret(e.left, pt, env), interpret(e.right, pt, env)
        return {"+": a + b, "-": a - b, "*": a * b}[e.op] if e.op != "/" else a / b
    if isinstance(e, App):
        args = [interpret(a, pt, env) for a in e.args]
        if e.fn in ELEMENTARY:
            return float(ELEMENTARY[e.fn](args[0]))
        return float(ZOO_FUNCTIONS[e.fn][1](*args))
    if isinstance(e, Let):
        inner = dict(env)
        inner[e.name] = interpret(e.value, pt, env)
        return interpret(e.body, pt, inner)
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# compilation

def _const_value(e: Expr) -> Fraction | None:
    """Exact value of a rational constant subexpression, if it is one."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Neg):
        v = _const_value(e.operand)
        return None if v is None else -v
    if isinstance(e, Pow):
        v = _const_value(e.base)
        return None if v is None else v ** e.exponent
    if isinstance(e, Bin):
        a, b = _const_value(e.left), _const_value(e.right)
        if a is None or b is None:
            return None
        if e.op == "/":
            return None if b == 0 else a / b
        return {"+": a + b, "-": a - b, "*": a * b}[e.op]
    return None


def _coefficient_leaf(e: Expr) -> Coefficient:
    if isinstance(e, Num):
        return Coefficient(e.value)
    return Coefficient(1, pi=1) if e.name == "pi" else Coefficient(1, e=1)


class _Compiler:
    def __init__(self, d: int, base: Sequence, tol: float):
        self.d = d
        self.base = tuple(Coefficient.coerce(b) for b in base)
        self.tol = tol
        self.coords = coordinates(d, self.base)

    def poly(self, e: Expr, env) -> Polynomial | None:
        """``e`` as a polynomial of the inputs, when it is one."""
        d = self.d
        if isinstance(e, (Num, Const)):
            return Polynomial.constant(_coefficient_leaf(e), d)
        if isinstance(e, Var):
            if e.name in env:
                return env[e.name][1]
            return Polynomial.variable(_var_index(e.name), d)
        if isinstance(e, Neg):
            p = self.poly(e.operand, env)
            return None if p is None else -p
        if isinstance(e, Pow):
            p = self.poly(e.base, env)
            return None if p is None else p ** e.exponent
        if isinstance(e, Bin) and e.op != "/":
            a, b = self.poly(e.left, env), self.poly(e.right, env)
            if a is None or b is None:
                return None
            return {"+": a + b, "-": a - b, "*": a * b}[e.op]
        if isinstance(e, Bin) and e.op == "/":
            a, b = self.poly(e.left, env), _const_value(e.right)
            if a is None or b is None or b == 0:
                return None
            return a.scale(1 / b)
        return None

    def compile(self, e: Expr, env) -> PIVP:
        try:
            return self._compile(e, env)
        except ExprError:
            raise
        except (ClosureError, ValueError) as exc:
            raise ExprError(str(exc), *e.pos) from exc

    def _compile(self, e: Expr, env) -> PIVP:
        p = self.poly(e, env)
        if p is not None:
            return apply_polynomial(self.coords, [p], name=pretty(e))
        if isinstance(e, Var):
            return env[e.name][0]
        if isinstance(e, Neg):
            return scale(self.compile(e.operand, env), -1)
        if isinstance(e, Pow):
            f = self.compile(e.base, env)
            y = Polynomial.variable(0, 1)
            return apply_polynomial(f, [y ** e.exponent], name=pretty(e))
        if isinstance(e, Bin):
            f = self.compile(e.left, env)
            g = self.compile(e.right, env)
            if e.op == "+":
                return combine(f, g, "add")
            if e.op == "-":
                return combine(f, g, "sub")
            if e.op == "*":
                return multiply(f, g)
            v = g.y0[0]
            if v.is_zero() or abs(float(v)) < 1e-12:
                raise ExprError(f"denominator {pretty(e.right)} vanishes at the base point "
                                f"{[float(b) for b in self.base]}; choose another --base",
                                *e.right.pos)
            return multiply(f, reciprocal(g))
        if isinstance(e, App):
            return self.app(e, env)
        if isinstance(e, Let):
            value = self.compile(e.value, env)
            inner = dict(env)
            inner[e.name] = (value, self.poly(e.value, env))
            return self.compile(e.body, inner)
        raise ExprError(f"cannot compile {e!r}", *e.pos)

    def app(self, e: App, env) -> PIVP:
        arg0 = e.args[0]
        if (e.fn in ELEMENTARY and e.fn != "ln" and isinstance(arg0, Var)
                and arg0.name not in env and self.d == 1):
            f = builtin(e.fn)
            if f.x0 == self.base:
                return f  # the builtin itself, unchanged
        args = [self.compile(a, env) for a in e.args]
        if e.fn in ELEMENTARY:
            g = args[0]
            if e.fn == "ln":
                v = float(g.y0[0])
                if not v > 0:
                    raise ExprError(f"ln argument is {v} at the base point; it must be positive",
                                    *e.pos)
                outer = builtin("ln", Fraction(min(v, 1.0)).limit_denominator(10**6) / 2)
            else:
                outer = builtin(e.fn)
            return compose(outer, g, self.tol)
        k = CONSTANT_ARGS.get(e.fn, 0)
        consts = []
        for a in e.args[:k]:
            c = _const_value(a)
            if c is None:
                raise ExprError(f"{e.fn}: interval end points must be rational constants", *a.pos)
            consts.append(c)
        gen = _zoo_generator(e.fn, consts)
        inner = stack(args[k:]) if len(args) - k > 1 else args[k]
        return compose(gen, inner, self.tol)


def _zoo_generator(fn: str, consts) -> PIVP:
    if fn in ("lxh", "hxl", "clamp"):
        a, b = consts
        if not a < b:
            raise ValueError(f"{fn}: interval needs a < b")
        return {"lxh": zoo.lxh_generator, "hxl": zoo.hxl_generator,
                "clamp": zoo.clamp_generator}[fn](a, b)
    return zoo.GENERATORS[fn]()


def compile_expr(e: Expr | str, base: Sequence | None = None, tol: float = 1e-12,
                 dim: int | None = None) -> PIVP:
    """Compile an expression bottom-up through the closure operations.

    ``base`` is the base point of the result (default: the origin).
    """
    if isinstance(e, str):
        e = parse(e)
    d = dim or input_dim(e)
    if base is None:
        base = (0,) * d
    base = list(base)
    if len(base) != d:
        raise ExprError(f"base point needs {d} coordinate(s), got {len(base)}")
    f = _Compiler(d, [Coefficient.coerce(_exact_base(b)) for b in base], tol).compile(e, {})
    return f.with_(name=pretty(e))


def _exact_base(b):
    if isinstance(b, float):
        return Fraction(Decimal(repr(b)))
    if isinstance(b, str):
        return Fraction(Decimal(b))
    return b
