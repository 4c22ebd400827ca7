"""Exact sparse multivariate polynomials.

Coefficients live in ``Q[pi, 1/pi, e, 1/e]``: finite sums of rationals times
integer powers of the two named constants. Numeric work substitutes the
constants from fixed 64-digit literals.

The canonical text form of a polynomial lists its terms in graded
lexicographic order (highest total degree first)::

    >>> p = Polynomial.variable(0, 1) ** 7 - 14 * Polynomial.variable(0, 1) ** 3
    >>> print((p + Coefficient(1, pi=2)).to_text())
    1/1*y1^7 + -14/1*y1^3 + 1/1*pi^2
"""
from __future__ import annotations

import math
import re
from collections.abc import Iterable, Mapping, Sequence
from fractions import Fraction
from numbers import Rational

import numpy as np

PI_LITERAL = "3.141592653589793238462643383279502884197169399375105820974944592"
E_LITERAL = "2.718281828459045235360287471352662497757247093699959574966967628"

_PI = float(PI_LITERAL)
_E = float(E_LITERAL)

Exponent = tuple[int, ...]


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        return Fraction(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


class Coefficient:
    """Element of ``Q[pi^±1, e^±1]``, optionally flagged as approximate.

    A coefficient is stored as a map ``(pi_exp, e_exp) -> Fraction`` with no
    zero entries. ``approximate`` marks values that were obtained numerically
    (for example initial values of a composition); arithmetic propagates the
    flag.
    """

    __slots__ = ("_terms", "approximate", "_hash")

    def __init__(self, value=0, pi: int = 0, e: int = 0, approximate: bool = False):
        r = _as_fraction(value)
        self._terms: dict[tuple[int, int], Fraction] = {(pi, e): r} if r else {}
        self.approximate = bool(approximate)
        self._hash = None

    @classmethod
    def _from_terms(cls, terms: Mapping[tuple[int, int], Fraction], approximate: bool) -> Coefficient:
        c = cls.__new__(cls)
        c._terms = {k: v for k, v in terms.items() if v}
        c.approximate = approximate
        c._hash = None
        return c

    @classmethod
    def coerce(cls, value) -> Coefficient:
        if isinstance(value, Coefficient):
            return value
        if isinstance(value, float):
            return cls.approx(value)
        return cls(value)

    @classmethod
    def approx(cls, value) -> Coefficient:
        """Approximate literal holding the exact binary value of ``value``."""
        if isinstance(value, Coefficient):
            return cls._from_terms(value._terms, True)
        if isinstance(value, (np.floating, float)):
            value = float(value)
            if not np.isfinite(value):
                raise ValueError("approximate coefficient must be finite")
        return cls(_as_fraction(value), approximate=True)

    # structure -----------------------------------------------------------
    @property
    def terms(self) -> dict[tuple[int, int], Fraction]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_rational(self) -> bool:
        return all(k == (0, 0) for k in self._terms)

    def is_monomial(self) -> bool:
        return len(self._terms) <= 1

    @property
    def rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self.to_text()} is not rational")
        return self._terms.get((0, 0), Fraction(0))

    # arithmetic ------------------------------------------------------------
    def __add__(self, other):
        try:
            o = Coefficient.coerce(other)
        except TypeError:
            return NotImplemented
        terms = dict(self._terms)
        for k, v in o._terms.items():
            terms[k] = terms.get(k, 0) + v
        return Coefficient._from_terms(terms, self.approximate or o.approximate)

    __radd__ = __add__

    def __neg__(self):
        return Coefficient._from_terms({k: -v for k, v in self._terms.items()}, self.approximate)

    def __sub__(self, other):
        try:
            o = Coefficient.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = Coefficient.coerce(other)
        except TypeError:
            return NotImplemented
        terms: dict[tuple[int, int], Fraction] = {}
        for (a1, b1), v1 in self._terms.items():
            for (a2, b2), v2 in o._terms.items():
                k = (a1 + a2, b1 + b2)
                terms[k] = terms.get(k, 0) + v1 * v2
        return Coefficient._from_terms(terms, self.approximate or o.approximate)

    __rmul__ = __mul__

    def inverse(self) -> Coefficient:
        """Exact inverse for single-term values, approximate otherwise."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero coefficient")
        if self.is_monomial():
            ((a, b), v), = self._terms.items()
            return Coefficient._from_terms({(-a, -b): 1 / v}, self.approximate)
        return Coefficient.approx(1.0 / float(self))

    def __truediv__(self, other):
        try:
            o = Coefficient.coerce(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return Coefficient.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out = Coefficient(1, approximate=self.approximate)
        for _ in range(k):
            out = out * self
        return out

    def __abs__(self):
        return -self if float(self) < 0 else self

    # comparison / conversion ---------------------------------------------
    def __float__(self) -> float:
        total = 0.0
        for (a, b), v in self._terms.items():
            try:
                r = float(v)
            except OverflowError:
                r = math.inf if v > 0 else -math.inf
            total += r * _PI**a * _E**b
        return total

    def __bool__(self):
        return bool(self._terms)

    def _key(self):
        return tuple(sorted(self._terms.items()))

    def __eq__(self, other):
        if isinstance(other, Coefficient):
            return self._key() == other._key()
        if isinstance(other, (int, Rational)):
            return self._key() == Coefficient(other)._key()
        if isinstance(other, float):
            return float(self) == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self):
        return f"Coefficient({self.to_text()!r})"

    # text form ------------------------------------------------------------
    def monomial_texts(self) -> list[str]:
        """One ``num/den[*pi^k][*e^k]`` string per constant monomial."""
        out = []
        for (a, b), v in sorted(self._terms.items(), key=lambda kv: (-kv[0][0], -kv[0][1])):
            s = f"{v.numerator}/{v.denominator}"
            if a:
                s += f"*pi^{a}"
            if b:
                s += f"*e^{b}"
            out.append(("~" if self.approximate else "") + s)
        return out

    def to_text(self) -> str:
        parts = self.monomial_texts()
        if not parts:
            return "~0/1" if self.approximate else "0/1"
        return " + ".join(parts)

    @classmethod
    def from_text(cls, text: str) -> Coefficient:
        text = text.strip()
        if not text:
            raise ValueError("empty coefficient string")
        total = Coefficient(0)
        approximate = False
        for part in _split_sum(text):
            c, exps = _parse_factors(part, arity=0)
            if any(exps):
                raise ValueError(f"variables not allowed in coefficient {text!r}")
            approximate = approximate or c.approximate
            total = total + c
        return cls._from_terms(total._terms, approximate)


def _split_sum(text: str) -> list[str]:
    return [p for p in (s.strip() for s in text.split(" + ")) if p]


_FACTOR = re.compile(r"^(pi|e|y(\d+))(?:\^(-?\d+))?$")


def _parse_factors(part: str, arity: int) -> tuple[Coefficient, list[int]]:
    approximate = part.startswith("~")
    if approximate:
        part = part[1:]
    tokens = part.split("*")
    try:
        value = Fraction(tokens[0])
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad coefficient literal {tokens[0]!r}") from exc
    pi_exp = e_exp = 0
    exps = [0] * arity
    for tok in tokens[1:]:
        m = _FACTOR.match(tok.strip())
        if not m:
            raise ValueError(f"bad factor {tok!r} in {part!r}")
        k = int(m.group(3)) if m.group(3) is not None else 1
        if m.group(1) == "pi":
            pi_exp += k
        elif m.group(1) == "e":
            e_exp += k
        else:
            idx = int(m.group(2)) - 1
            if not 0 <= idx < arity or k < 0:
                raise ValueError(f"variable {tok!r} out of range for arity {arity}")
            exps[idx] += k
    return Coefficient(value, pi=pi_exp, e=e_exp, approximate=approximate), exps


def _grlex_key(exp: Exponent):
    return (-sum(exp), tuple(-v for v in exp))


class Polynomial:
    """Sparse polynomial in ``arity`` variables with :class:`Coefficient` entries.

    Instances are immutable. Arithmetic between polynomials of different
    arity pads the smaller one with unused trailing variables.
    """

    __slots__ = ("arity", "_terms", "_horner", "_hash")

    def __init__(self, arity: int, terms: Mapping[Iterable[int], object] | None = None):
        if arity < 0:
            raise ValueError("arity must be nonnegative")
        self.arity = arity
        clean: dict[Exponent, Coefficient] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(v) for v in exp)
            if len(exp) != arity or any(v < 0 for v in exp):
                raise ValueError(f"exponent {exp} invalid for arity {arity}")
            c = Coefficient.coerce(c)
            if exp in clean:
                c = clean[exp] + c
            clean[exp] = c
        self._terms = {k: v for k, v in clean.items() if not v.is_zero()}
        self._horner = None
        self._hash = None

    # constructors -----------------------------------------------------------
    @classmethod
    def zero(cls, arity: int) -> Polynomial:
        return cls(arity)

    @classmethod
    def constant(cls, value, arity: int) -> Polynomial:
        return cls(arity, {(0,) * arity: value})

    @classmethod
    def variable(cls, index: int, arity: int) -> Polynomial:
        if not 0 <= index < arity:
            raise IndexError(f"variable {index} out of range for arity {arity}")
        exp = [0] * arity
        exp[index] = 1
        return cls(arity, {tuple(exp): 1})

    # structure ----------------------------------------------------------------
    @property
    def terms(self) -> dict[Exponent, Coefficient]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def constant_term(self) -> Coefficient:
        return self._terms.get((0,) * self.arity, Coefficient(0))

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=0)

    @property
    def sigma(self) -> float:
        return sum(abs(float(c)) for c in self._terms.values())

    def is_approximate(self) -> bool:
        return any(c.approximate for c in self._terms.values())

    def variables(self) -> set[int]:
        return {i for e in self._terms for i, v in enumerate(e) if v}

    # arithmetic -------------------------------------------------------------
    def pad(self, arity: int) -> Polynomial:
        if arity == self.arity:
            return self
        if arity < self.arity:
            raise ValueError("cannot shrink arity by padding")
        extra = (0,) * (arity - self.arity)
        return Polynomial(arity, {e + extra: c for e, c in self._terms.items()})

    def _coerce(self, other) -> Polynomial | None:
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (Coefficient, int, Rational)):
            return Polynomial.constant(other, self.arity)
        return None

    def _align(self, other):
        o = self._coerce(other)
        if o is None:
            return None, None
        n = max(self.arity, o.arity)
        return self.pad(n), o.pad(n)

    def __add__(self, other):
        a, b = self._align(other)
        if a is None:
            return NotImplemented
        terms = dict(a._terms)
        for e, c in b._terms.items():
            terms[e] = terms[e] + c if e in terms else c
        return Polynomial(a.arity, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.arity, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        a, b = self._align(other)
        if a is None:
            return NotImplemented
        return a + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._align(other)
        if a is None:
            return NotImplemented
        terms: dict[Exponent, Coefficient] = {}
        for e1, c1 in a._terms.items():
            for e2, c2 in b._terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                terms[e] = terms[e] + c1 * c2 if e in terms else c1 * c2
        return Polynomial(a.arity, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers need a nonnegative integer exponent")
        out = Polynomial.constant(1, self.arity)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def scale(self, c) -> Polynomial:
        c = Coefficient.coerce(c)
        return Polynomial(self.arity, {e: v * c for e, v in self._terms.items()})

    def partial(self, i: int) -> Polynomial:
        if not 0 <= i < self.arity:
            raise IndexError(f"variable {i} out of range for arity {self.arity}")
        terms = {}
        for e, c in self._terms.items():
            if e[i]:
                d = list(e)
                d[i] -= 1
                terms[tuple(d)] = c * e[i]
        return Polynomial(self.arity, terms)

    def embed(self, mapping: Sequence[int], arity: int) -> Polynomial:
        """Rename variable ``i`` to ``mapping[i]`` in a polynomial of ``arity`` variables."""
        if len(mapping) != self.arity:
            raise ValueError("mapping length must equal arity")
        terms: dict[Exponent, Coefficient] = {}
        for e, c in self._terms.items():
            new = [0] * arity
            for i, v in enumerate(e):
                if v:
                    new[mapping[i]] += v
            key = tuple(new)
            terms[key] = terms[key] + c if key in terms else c
        return Polynomial(arity, terms)

    def substitute(self, values: Sequence[Polynomial]) -> Polynomial:
        """Compose: replace variable ``i`` by the polynomial ``values[i]``."""
        if len(values) != self.arity:
            raise ValueError("need one polynomial per variable")
        arity = max((v.arity for v in values), default=0)
        values = [v.pad(arity) for v in values]
        out = Polynomial.zero(arity)
        powers: dict[tuple[int, int], Polynomial] = {}
        for e, c in self._terms.items():
            term = Polynomial.constant(c, arity)
            for i, k in enumerate(e):
                if k:
                    if (i, k) not in powers:
                        powers[(i, k)] = values[i] ** k
                    term = term * powers[(i, k)]
            out = out + term
        return out

    # evaluation -------------------------------------------------------------
    def _horner_tree(self):
        if self._horner is None:
            self._horner = _build_horner(
                [(e, c) for e, c in self._terms.items()], 0, self.arity)
        return self._horner

    def evaluate(self, x: Sequence[float]) -> float:
        if len(x) != self.arity:
            raise ValueError(f"expected {self.arity} values, got {len(x)}")
        if not self._terms:
            return 0.0
        return float(_eval_horner(self._horner_tree(), [float(v) for v in x], 0, float))

    def evaluate_exact(self, x: Sequence) -> Coefficient:
        if len(x) != self.arity:
            raise ValueError(f"expected {self.arity} values, got {len(x)}")
        xs = [Coefficient.coerce(v) for v in x]
        if not self._terms:
            return Coefficient(0)
        return _eval_horner(self._horner_tree(), xs, 0, lambda c: c)

    __call__ = evaluate

    # text / identity -----------------------------------------------------------
    def sorted_terms(self) -> list[tuple[Exponent, Coefficient]]:
        return sorted(self._terms.items(), key=lambda kv: _grlex_key(kv[0]))

    def to_text(self, var: str = "y") -> str:
        parts = []
        for e, c in self.sorted_terms():
            mono = "".join(
                f"*{var}{i + 1}" + (f"^{v}" if v > 1 else "") for i, v in enumerate(e) if v)
            parts.extend(m + mono for m in c.monomial_texts())
        return " + ".join(parts) if parts else "0"

    @classmethod
    def from_text(cls, text: str, arity: int) -> Polynomial:
        text = text.strip()
        if text in ("0", "0/1", ""):
            return cls.zero(arity)
        terms: dict[Exponent, Coefficient] = {}
        for part in _split_sum(text):
            c, exps = _parse_factors(part, arity)
            key = tuple(exps)
            terms[key] = terms[key] + c if key in terms else c
        return cls(arity, terms)

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            if self.arity != other.arity:
                n = max(self.arity, other.arity)
                return self.pad(n)._terms == other.pad(n)._terms
            return self._terms == other._terms
        if isinstance(other, (int, Rational, Coefficient)):
            return self == Polynomial.constant(other, self.arity)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.arity, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self):
        return f"Polynomial({self.arity}, {self.to_text()!r})"


def _build_horner(terms, v, arity):
    if v == arity:
        (_, c), = terms
        return c
    groups: dict[int, list] = {}
    for e, c in terms:
        groups.setdefault(e[v], []).append((e, c))
    return sorted(((k, _build_horner(g, v + 1, arity)) for k, g in groups.items()),
                  key=lambda kv: -kv[0])


def _eval_horner(node, x, v, conv):
    if v == len(x):
        return float(node) if conv is float else node
    acc = None
    prev = 0
    for k, child in node:
        val = _eval_horner(child, x, v + 1, conv)
        acc = val if acc is None else acc * x[v] ** (prev - k) + val
        prev = k
    return acc * x[v] ** prev if prev else acc


class PolyMatrix:
    """Row-major ``rows x cols`` grid of polynomials sharing one arity."""

    __slots__ = ("rows", "cols", "arity", "entries")

    def __init__(self, entries: Sequence[Sequence[Polynomial]], arity: int | None = None):
        rows = [list(r) for r in entries]
        self.rows = len(rows)
        self.cols = len(rows[0]) if rows else 0
        if any(len(r) != self.cols for r in rows):
            raise ValueError("ragged polynomial matrix")
        if arity is None:
            arity = max((p.arity for r in rows for p in r), default=0)
        self.arity = arity
        self.entries: tuple[tuple[Polynomial, ...], ...] = tuple(
            tuple(p.pad(arity) if p.arity < arity else p for p in r) for r in rows)

    @classmethod
    def column(cls, polys: Sequence[Polynomial], arity: int | None = None) -> PolyMatrix:
        return cls([[p] for p in polys], arity)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i: int) -> tuple[Polynomial, ...]:
        return self.entries[i]

    def col(self, j: int) -> list[Polynomial]:
        return [r[j] for r in self.entries]

    def __iter__(self):
        return iter(self.entries)

    @property
    def degree(self) -> int:
        return max((p.degree for r in self.entries for p in r), default=0)

    @property
    def sigma(self) -> float:
        return max((p.sigma for r in self.entries for p in r), default=0.0)

    def uniform_arity(self) -> bool:
        return all(p.arity == self.arity for r in self.entries for p in r)

    def evaluate(self, y: Sequence[float]) -> np.ndarray:
        return np.array([[p.evaluate(y) for p in r] for r in self.entries], dtype=float)

    def __eq__(self, other):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return (self.rows, self.cols) == (other.rows, other.cols) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return f"PolyMatrix({self.rows}x{self.cols}, arity={self.arity})"


# ---------------------------------------------------------------------------
# operation-level API

def poly_eval(p: Polynomial, x: Sequence, exact: bool = False):
    """Evaluate ``p`` at ``x``; ``exact=True`` returns a :class:`Coefficient`."""
    return p.evaluate_exact(x) if exact else p.evaluate(x)


def poly_degree_sigma(p: Polynomial | PolyMatrix) -> tuple[int, float]:
    """Total degree and sum of absolute coefficients (max over entries for matrices)."""
    return p.degree, p.sigma


def poly_arith(a: Polynomial, b: Polynomial, op: str) -> Polynomial:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown polynomial operation {op!r}")


def poly_partial(p: Polynomial, i: int) -> Polynomial:
    return p.partial(i)


def _series_mul(a, b, order, zero):
    out = []
    for k in range(order + 1):
        acc = zero
        for j in range(k + 1):
            acc = acc + a[j] * b[k - j]
        out.append(acc)
    return out


def taylor_recurrence(p, coeffs: Sequence[Sequence]) -> list:
    """Next Taylor coefficient of the solution of ``y' = p(y)``.

    ``coeffs[j]`` holds the order-``j`` coefficient vector for ``j = 0..k``.
    Returns ``c_{k+1} = [t^k] p(sum_j c_j t^j) / (k+1)``. Entries may be floats
    (numeric mode) or exact rationals / :class:`Coefficient` (exact mode).
    """
    polys = p.col(0) if isinstance(p, PolyMatrix) else list(p)
    k = len(coeffs) - 1
    if k < 0:
        raise ValueError("need at least the order-0 coefficients")
    n = len(coeffs[0])
    numeric = any(isinstance(v, (float, np.floating)) for c in coeffs for v in c)
    zero = 0.0 if numeric else Coefficient(0)

    def conv(c: Coefficient):
        return float(c) if numeric else c

    series = [[(float(coeffs[j][i]) if numeric else Coefficient.coerce(coeffs[j][i]))
               for j in range(k + 1)] for i in range(n)]
    powers: dict[tuple[int, int], list] = {}

    def power(i, m):
        if (i, m) not in powers:
            powers[(i, m)] = series[i] if m == 1 else _series_mul(power(i, m - 1), series[i], k, zero)
        return powers[(i, m)]

    out = []
    scale = Fraction(1, k + 1)
    for poly in polys:
        acc = zero
        for e, c in poly.items():
            term = None
            for i, m in enumerate(e):
                if m:
                    s = power(i, m)
                    term = s if term is None else _series_mul(term, s, k, zero)
            if term is None:
                contrib = conv(c) if k == 0 else zero
            else:
                contrib = conv(c) * term[k]
            acc = acc + contrib
        out.append(acc * (float(scale) if numeric else scale))
    return out
