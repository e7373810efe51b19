"""Sparse multivariate polynomials with exact rational coefficients.

A :class:`Polynomial` maps exponent tuples (monomials) to nonzero ``mpq``
coefficients over an ordered tuple of variable names.  Values are immutable.
Printing uses graded lexicographic order, highest term first.
"""
from __future__ import annotations

import itertools
import re
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

Monomial = tuple[int, ...]

ZERO = mpq(0)
ONE = mpq(1)


def to_rational(value) -> mpq:
    """Convert ints, Fractions, floats (exactly), mpq and ``"p/q"`` strings."""
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        return mpq(value.strip())
    return mpq(value)


def format_rational(value) -> str:
    q = to_rational(value)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def mono_degree(mono: Monomial) -> int:
    return sum(mono)


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


def grlex_key(mono: Monomial):
    return (sum(mono), mono)


def monomials_of_degree(nvars: int, degree: int) -> list[Monomial]:
    """All exponent tuples of exact total degree, in descending grlex order."""
    if nvars == 0:
        return [()] if degree == 0 else []
    out = []
    for first in range(degree, -1, -1):
        for rest in monomials_of_degree(nvars - 1, degree - first):
            out.append((first,) + rest)
    return out


def monomials_up_to(nvars: int, degree: int) -> list[Monomial]:
    """All exponent tuples of total degree <= ``degree``, ascending by degree."""
    out = []
    for d in range(degree + 1):
        out.extend(sorted(monomials_of_degree(nvars, d), key=grlex_key))
    return out


class Polynomial:
    """Immutable sparse polynomial over Q.

    >>> p = Polynomial.parse("x^2 + y", ["x", "y"])
    >>> str(p + Polynomial.parse("-x^2", ["x", "y"]))
    'y'
    """

    __slots__ = ("vars", "terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, object] | None = None,
                 variables: Sequence[str] = ()):
        self.vars = tuple(variables)
        n = len(self.vars)
        clean: dict[Monomial, mpq] = {}
        for mono, coeff in (terms or {}).items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != n:
                raise ValueError(f"monomial {mono} does not match {n} variables")
            if any(e < 0 for e in mono):
                raise ValueError(f"negative exponent in {mono}")
            c = to_rational(coeff)
            if c:
                clean[mono] = clean.get(mono, ZERO) + c
                if not clean[mono]:
                    del clean[mono]
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict, variables: tuple) -> "Polynomial":
        # trusted constructor: terms already canonical
        p = cls.__new__(cls)
        p.vars = variables
        p.terms = terms
        p._hash = None
        return p

    @classmethod
    def constant(cls, value, variables: Sequence[str] = ()) -> "Polynomial":
        return cls({(0,) * len(variables): value}, variables)

    @classmethod
    def variable(cls, name: str, variables: Sequence[str]) -> "Polynomial":
        variables = tuple(variables)
        mono = tuple(1 if v == name else 0 for v in variables)
        if sum(mono) != 1:
            raise ValueError(f"undeclared variable {name}")
        return cls({mono: 1}, variables)

    @classmethod
    def monomial(cls, mono: Monomial, variables: Sequence[str], coeff=1) -> "Polynomial":
        return cls({tuple(mono): coeff}, variables)

    @classmethod
    def parse(cls, text: str, variables: Sequence[str]) -> "Polynomial":
        return parse_polynomial(text, variables)

    # -- structure -------------------------------------------------------

    @property
    def nvars(self) -> int:
        return len(self.vars)

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(m) for m in self.terms), default=-1)

    def min_degree(self) -> int:
        return min((sum(m) for m in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(m) for m in self.terms}) <= 1

    def is_constant(self) -> bool:
        return all(sum(m) == 0 for m in self.terms)

    def coefficient(self, mono: Monomial) -> mpq:
        return self.terms.get(tuple(mono), ZERO)

    def monomials(self) -> list[Monomial]:
        return sorted(self.terms, key=grlex_key, reverse=True)

    def _check(self, other: "Polynomial") -> None:
        if self.vars != other.vars:
            raise ValueError(f"variable mismatch: {self.vars} vs {other.vars}")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        return Polynomial.constant(other, self.vars)

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        terms = dict(self.terms)
        for mono, c in other.terms.items():
            s = terms.get(mono, ZERO) + c
            if s:
                terms[mono] = s
            else:
                terms.pop(mono, None)
        return Polynomial._raw(terms, self.vars)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw({m: -c for m, c in self.terms.items()}, self.vars)

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            c = to_rational(other)
            if not c:
                return Polynomial._raw({}, self.vars)
            return Polynomial._raw({m: v * c for m, v in self.terms.items()}, self.vars)
        self._check(other)
        terms: dict[Monomial, mpq] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                mono = tuple(x + y for x, y in zip(ma, mb))
                terms[mono] = terms.get(mono, ZERO) + ca * cb
        return Polynomial._raw({m: c for m, c in terms.items() if c}, self.vars)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        if k < 0:
            raise ValueError("negative power")
        result = Polynomial.constant(1, self.vars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __truediv__(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if not other.is_constant() or other.is_zero():
                raise ZeroDivisionError("division by a non-constant or zero polynomial")
            other = other.coefficient((0,) * other.nvars)
        c = to_rational(other)
        if not c:
            raise ZeroDivisionError("division by zero")
        return self * (1 / c)

    def evaluate(self, point: Sequence) -> mpq:
        """Exact value at ``point`` (one rational per variable)."""
        if len(point) != self.nvars:
            raise ValueError(f"point has {len(point)} coordinates, expected {self.nvars}")
        pt = [to_rational(v) for v in point]
        total = ZERO
        for mono, c in self.terms.items():
            term = c
            for v, e in zip(pt, mono):
                if e:
                    term *= v ** e
            total += term
        return total

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.vars == other.vars and self.terms == other.terms
        if isinstance(other, (int, Fraction)) or type(other) is type(ZERO):
            return self == Polynomial.constant(other, self.vars)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.vars, frozenset(self.terms.items())))
        return self._hash

    # -- printing ----------------------------------------------------------

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mono in self.monomials():
            c = self.terms[mono]
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            mstr = format_monomial(mono, self.vars)
            if mstr == "1":
                body = format_rational(mag)
            elif mag == 1:
                body = mstr
            else:
                body = f"{format_rational(mag)}*{mstr}"
            parts.append((sign, body))
        first_sign, first_body = parts[0]
        out = ("-" if first_sign == "-" else "") + first_body
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self) -> str:
        return f"Polynomial({str(self)!r}, vars={list(self.vars)})"


def format_monomial(mono: Monomial, variables: Sequence[str]) -> str:
    factors = []
    for name, e in zip(variables, mono):
        if e == 1:
            factors.append(name)
        elif e > 1:
            factors.append(f"{name}^{e}")
    return "*".join(factors) if factors else "1"


# -- parsing ---------------------------------------------------------------

class ParseError(ValueError):
    """Syntax error with a 1-based line/column position."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


_TOKEN = re.compile(r"(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\S)")


def _tokenize(text: str, line: int):
    tokens = []
    for m in _TOKEN.finditer(text):
        if m.group(1) is not None:
            tokens.append(("num", m.group(1), m.start()))
        elif m.group(2) is not None:
            tokens.append(("id", m.group(2), m.start()))
        else:
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise ParseError(f"unexpected character {ch!r}", line, m.start() + 1)
            tokens.append(("op", ch, m.start()))
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: Sequence[str], line: int, col_offset: int):
        self.vars = tuple(variables)
        self.line = line
        self.col_offset = col_offset
        self.toks = _tokenize(text, line)
        self.i = 0

    def error(self, msg: str, tok=None):
        tok = tok or self.toks[self.i]
        raise ParseError(msg, self.line, tok[2] + 1 + self.col_offset)

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def parse(self) -> Polynomial:
        if self.peek()[0] == "end":
            self.error("empty polynomial")
        p = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected {self.peek()[1]!r}")
        return p

    def expr(self) -> Polynomial:
        sign = 1
        if self.peek()[:2] in (("op", "+"), ("op", "-")):
            sign = -1 if self.take()[1] == "-" else 1
        p = self.term() * sign
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            t = self.term()
            p = p + t if op == "+" else p - t
        return p

    def _starts_factor(self, tok) -> bool:
        return tok[0] in ("num", "id") or tok[:2] == ("op", "(")

    def term(self) -> Polynomial:
        p = self.factor()
        while True:
            tok = self.peek()
            if tok[:2] == ("op", "*"):
                self.take()
                p = p * self.factor()
            elif tok[:2] == ("op", "/"):
                self.take()
                q = self.factor()
                if not q.is_constant() or q.is_zero():
                    self.error("division by a non-constant or zero expression", tok)
                p = p / q
            elif self._starts_factor(tok):
                p = p * self.factor()
            else:
                return p

    def factor(self) -> Polynomial:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            tok = self.take()
            if tok[0] != "num":
                self.error("expected a nonnegative integer exponent", tok)
            base = base ** int(tok[1])
        return base

    def atom(self) -> Polynomial:
        tok = self.take()
        kind, val = tok[0], tok[1]
        if kind == "num":
            return Polynomial.constant(int(val), self.vars)
        if kind == "id":
            if val not in self.vars:
                self.error(f"undeclared variable {val}", tok)
            return Polynomial.variable(val, self.vars)
        if tok[:2] == ("op", "("):
            p = self.expr()
            if self.take()[:2] != ("op", ")"):
                self.error("expected ')'", self.toks[self.i - 1])
            return p
        if tok[:2] == ("op", "-"):
            return -self.factor()
        self.i -= 1
        self.error("expected a number, variable or '('")


def parse_polynomial(text: str, variables: Sequence[str], *, line: int = 1,
                     column: int = 1) -> Polynomial:
    """Parse ``x1^6 + x2^4*x3^2 - 3/2*x1^2``-style text.

    ``*`` between factors is optional; ``/`` divides by a constant.
    ``line``/``column`` shift reported error positions when the text is a
    fragment of a larger file.
    """
    return _Parser(text, variables, line, column - 1).parse()


# -- Newton polytope -----------------------------------------------------------

def _rref_fraction(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    rows = [list(r) for r in rows]
    pivots = []
    r = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        piv = rows[r][c]
        rows[r] = [x / piv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return rows[:r], pivots


class _Hull:
    """Exact convex hull of integer points as affine-hull equations plus facets."""

    def __init__(self, points: Iterable[Sequence[int]]):
        pts = sorted({tuple(p) for p in points})
        if not pts:
            raise ValueError("empty point set")
        self.base = pts[0]
        diffs = [[Fraction(a - b) for a, b in zip(p, self.base)] for p in pts[1:]]
        n = len(self.base)
        if diffs:
            self.span, self.coords = _rref_fraction(diffs)
        else:
            self.span, self.coords = [], []
        self.dim = len(self.coords)
        self.nvars = n
        # project onto pivot coordinates; injective on the affine hull
        self.proj = [tuple(Fraction(p[c]) for c in self.coords) for p in pts]
        self.facets = self._facets()

    def _facets(self):
        d = self.dim
        if d == 0:
            return []
        pts = self.proj
        facets = set()
        for subset in itertools.combinations(range(len(pts)), d):
            anchor = pts[subset[0]]
            rows = [[a - b for a, b in zip(pts[i], anchor)] for i in subset[1:]]
            normal = _null_vector(rows, d)
            if normal is None:
                continue
            offset = sum(a * b for a, b in zip(normal, anchor))
            sides = [sum(a * b for a, b in zip(normal, p)) - offset for p in pts]
            if all(s <= 0 for s in sides):
                facets.add(_normalize(normal, offset))
            elif all(s >= 0 for s in sides):
                facets.add(_normalize([-a for a in normal], -offset))
        return sorted(facets)

    def contains(self, point: Sequence) -> bool:
        x = [Fraction(v) for v in point]
        diff = [a - b for a, b in zip(x, self.base)]
        # membership in the affine hull: diff must reduce to zero against the span
        residual = list(diff)
        for row, c in zip(self.span, self.coords):
            f = residual[c]
            if f:
                residual = [a - f * b for a, b in zip(residual, row)]
        if any(residual):
            return False
        px = [x[c] for c in self.coords]
        return all(sum(a * b for a, b in zip(normal, px)) <= off for normal, off in self.facets)


def _null_vector(rows, d):
    """A nonzero vector orthogonal to ``rows`` if they have rank d-1, else None."""
    if d == 1:
        return [Fraction(1)] if not rows else None
    red, piv = _rref_fraction(rows)
    if len(piv) != d - 1:
        return None
    free = next(c for c in range(d) if c not in piv)
    vec = [Fraction(0)] * d
    vec[free] = Fraction(1)
    for row, p in zip(red, piv):
        vec[p] = -row[free]
    return vec


def _normalize(normal, offset):
    from math import gcd, lcm
    den = 1
    for a in list(normal) + [offset]:
        den = lcm(den, Fraction(a).denominator)
    ints = [int(a * den) for a in normal] + [int(offset * den)]
    g = 0
    for a in ints:
        g = gcd(g, a)
    g = g or 1
    ints = [a // g for a in ints]
    return tuple(ints[:-1]), ints[-1]


def newton_halved_monomials(p: Polynomial, homogeneous: bool = False) -> list[Monomial]:
    """Monomials ``m`` with ``2*m`` in the Newton polytope of ``p``.

    These are the only monomials that can occur in any sum-of-squares
    decomposition of ``p``.  With ``homogeneous`` set and ``p`` homogeneous of
    degree 2d, only degree-d monomials are returned.  Result is in ascending
    grlex order.
    """
    if p.is_zero():
        raise ValueError("Newton polytope of the zero polynomial is empty")
    pts = list(p.terms)
    hull = _Hull(pts)
    n = p.nvars
    lo = [min(pt[i] for pt in pts) for i in range(n)]
    hi = [max(pt[i] for pt in pts) for i in range(n)]
    ranges = [range((lo[i] + 1) // 2, hi[i] // 2 + 1) for i in range(n)]
    target_degree = None
    if homogeneous and p.is_homogeneous():
        deg = p.degree()
        if deg % 2:
            return []
        target_degree = deg // 2
    out = []
    for mono in itertools.product(*ranges):
        if target_degree is not None and sum(mono) != target_degree:
            continue
        if hull.contains([2 * e for e in mono]):
            out.append(tuple(mono))
    return sorted(out, key=grlex_key)


def variables_check(polys: Iterable[Polynomial]) -> tuple[str, ...]:
    polys = list(polys)
    if not polys:
        return ()
    v = polys[0].vars
    for q in polys[1:]:
        if q.vars != v:
            raise ValueError(f"variable mismatch: {v} vs {q.vars}")
    return v
