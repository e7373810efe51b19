"""Witness data, independent verification, and the certificate text format.

Only :mod:`ratsos.poly` and :mod:`ratsos.sos` are imported here, so the
checking path never touches solver, lattice or linear-algebra code.

Certificate layout (one item per line, ``#`` starts a comment)::

    format ratsos-certificate 1
    vars x y
    goal unsat                      | goal nonneg <poly>
    assume <poly>                   (unsat only, in order P1, P2, ...)
    part <label>
    poly <poly>
    basis <monomial> <monomial> ...
    square <c> <v1> <v2> ...        (zero or more)
    end

Labels are ``P1``, ``P1*P3`` or ``const`` for refutations and ``den`` /
``num`` for nonnegativity.  The identity checked is
``sum_j poly_j * Q_j + 1 = 0`` (unsat) or ``P*Q_den - Q_num = 0`` with
``Q_den`` nonzero (nonneg).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

from gmpy2 import mpq

from .poly import (Monomial, ParseError, Polynomial, format_monomial, format_rational,
                   parse_polynomial)
from .sos import SosDecomposition, expand_sos

FORMAT_VERSION = 1
UNSAT = "unsat"
NONNEG = "nonneg"


@dataclass
class WitnessPart:
    label: str
    polynomial: Polynomial
    basis: list[Monomial]
    multiplier: SosDecomposition

    def expanded(self, variables) -> Polynomial:
        return expand_sos(self.multiplier, self.basis, variables)


@dataclass
class PsatzWitness:
    """A refutation or nonnegativity witness together with its problem."""

    kind: str
    variables: tuple[str, ...]
    parts: list[WitnessPart]
    assumptions: list[Polynomial] = field(default_factory=list)
    goal: Polynomial | None = None

    def part(self, label: str) -> WitnessPart | None:
        for p in self.parts:
            if p.label == label:
                return p
        return None


class Verdict:
    """Accept (truthy) or Reject (falsy) with the first violated condition."""

    def __init__(self, accepted: bool, reason: str = ""):
        self.accepted = accepted
        self.reason = reason

    def __bool__(self) -> bool:
        return self.accepted

    def __repr__(self) -> str:
        return "Accept()" if self.accepted else f"Reject({self.reason!r})"


def Accept() -> Verdict:
    return Verdict(True)


def Reject(reason: str) -> Verdict:
    return Verdict(False, reason)


_PRODUCT_LABEL = re.compile(r"P([1-9][0-9]*)(\*P([1-9][0-9]*))*\Z")


def label_polynomial(label: str, kind: str, variables, assumptions: Sequence[Polynomial],
                     goal: Polynomial | None) -> Polynomial | None:
    """The polynomial a label stands for, or None for an unknown label."""
    one = Polynomial.constant(1, variables)
    if kind == UNSAT:
        if label == "const":
            return one
        if not _PRODUCT_LABEL.match(label):
            return None
        idx = [int(s[1:]) for s in label.split("*")]
        if any(i > len(assumptions) for i in idx) or len(set(idx)) != len(idx) or idx != sorted(idx):
            return None
        out = one
        for i in idx:
            out = out * assumptions[i - 1]
        return out
    if kind == NONNEG and goal is not None:
        if label == "den":
            return goal
        if label == "num":
            return -one
    return None


def verify_witness(w: PsatzWitness) -> Verdict:
    """Exact re-check of every claim a witness makes; trusts nothing."""
    if w.kind not in (UNSAT, NONNEG):
        return Reject(f"unknown witness kind {w.kind!r}")
    variables = tuple(w.variables)
    if w.kind == NONNEG and w.goal is None:
        return Reject("nonnegativity witness without a goal polynomial")
    if w.kind == UNSAT and not w.assumptions:
        return Reject("refutation without assumptions")
    for p in list(w.assumptions) + ([w.goal] if w.goal is not None else []):
        if p.vars != variables:
            return Reject("problem polynomial over different variables")
    seen = set()
    total = Polynomial({}, variables)
    expansions = {}
    for part in w.parts:
        if part.label in seen:
            return Reject(f"duplicate part {part.label}")
        seen.add(part.label)
        expected = label_polynomial(part.label, w.kind, variables, w.assumptions, w.goal)
        if expected is None:
            return Reject(f"unknown part label {part.label}")
        if part.polynomial != expected:
            return Reject(f"part {part.label}: polynomial does not match its label")
        if len(set(map(tuple, part.basis))) != len(part.basis):
            return Reject(f"part {part.label}: repeated basis monomial")
        if any(len(m) != len(variables) or min(m, default=0) < 0 for m in part.basis):
            return Reject(f"part {part.label}: malformed basis monomial")
        for c, v in part.multiplier.terms:
            if not c > 0:
                return Reject(f"part {part.label}: nonpositive square coefficient")
            if len(v) != len(part.basis):
                return Reject(f"part {part.label}: vector length does not match basis")
        q = part.expanded(variables)
        expansions[part.label] = q
        total = total + expected * q
    if w.kind == UNSAT:
        residual = total + 1
    else:
        if "den" not in expansions or expansions["den"].is_zero():
            return Reject("denominator sum of squares is zero")
        residual = total
    if not residual.is_zero():
        text = str(residual)
        if len(text) > 80:
            text = text[:77] + "..."
        return Reject(f"identity does not vanish (residual {text})")
    return Accept()


# -- text format -----------------------------------------------------------------

class CertificateSyntaxError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.message = message
        self.line = line


def format_certificate(w: PsatzWitness) -> str:
    lines = [f"format ratsos-certificate {FORMAT_VERSION}", "vars " + " ".join(w.variables)]
    if w.kind == NONNEG:
        lines.append(f"goal nonneg {w.goal}")
    else:
        lines.append("goal unsat")
        lines.extend(f"assume {p}" for p in w.assumptions)
    for part in w.parts:
        lines.append(f"part {part.label}")
        lines.append(f"poly {part.polynomial}")
        lines.append("basis " + " ".join(format_monomial(m, w.variables) for m in part.basis))
        for c, v in part.multiplier.terms:
            lines.append("square " + " ".join(format_rational(x) for x in [c] + list(v)))
        lines.append("end")
    return "\n".join(lines) + "\n"


def _parse_rational(tok: str, lineno: int) -> mpq:
    if not re.fullmatch(r"[+-]?\d+(/\d+)?", tok):
        raise CertificateSyntaxError(f"bad rational {tok!r}", lineno)
    if tok.endswith("/0"):
        raise CertificateSyntaxError(f"zero denominator in {tok!r}", lineno)
    return mpq(tok)


def _parse_monomial(tok: str, variables, lineno: int) -> Monomial:
    try:
        p = parse_polynomial(tok, variables, line=lineno)
    except ParseError as e:
        raise CertificateSyntaxError(e.message, lineno) from None
    if len(p.terms) != 1 or next(iter(p.terms.values())) != 1:
        raise CertificateSyntaxError(f"{tok!r} is not a monomial", lineno)
    return next(iter(p.terms))


def parse_certificate(text: str) -> PsatzWitness:
    """Parse certificate text; raises :class:`CertificateSyntaxError`."""
    variables = None
    kind = goal = None
    assumptions: list[Polynomial] = []
    parts: list[WitnessPart] = []
    current = None
    saw_format = False

    def poly(body, lineno):
        if variables is None:
            raise CertificateSyntaxError("polynomial before 'vars'", lineno)
        try:
            return parse_polynomial(body, variables, line=lineno)
        except ParseError as e:
            raise CertificateSyntaxError(e.message, lineno) from None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, body = line.partition(" ")
        body = body.strip()
        if not saw_format:
            if key != "format" or body.split()[:1] != ["ratsos-certificate"]:
                raise CertificateSyntaxError("expected 'format ratsos-certificate <version>'", lineno)
            if body.split()[1:] != [str(FORMAT_VERSION)]:
                raise CertificateSyntaxError(f"unsupported format version {body!r}", lineno)
            saw_format = True
            continue
        if current is not None and key not in ("poly", "basis", "square", "end"):
            raise CertificateSyntaxError(f"'{key}' inside part {current['label']}", lineno)
        if key == "vars":
            if variables is not None:
                raise CertificateSyntaxError("repeated 'vars'", lineno)
            names = body.split()
            if len(set(names)) != len(names) or not all(re.fullmatch(r"[A-Za-z_]\w*", n) for n in names):
                raise CertificateSyntaxError("bad variable list", lineno)
            variables = tuple(names)
        elif key == "goal":
            if kind is not None:
                raise CertificateSyntaxError("repeated 'goal'", lineno)
            g, _, rest = body.partition(" ")
            if g == UNSAT and not rest.strip():
                kind = UNSAT
            elif g == NONNEG and rest.strip():
                kind = NONNEG
                goal = poly(rest, lineno)
            else:
                raise CertificateSyntaxError("expected 'goal unsat' or 'goal nonneg <poly>'", lineno)
        elif key == "assume":
            if kind != UNSAT:
                raise CertificateSyntaxError("'assume' needs 'goal unsat' first", lineno)
            assumptions.append(poly(body, lineno))
        elif key == "part":
            if kind is None or not body or " " in body:
                raise CertificateSyntaxError("'part <label>' needs a goal first", lineno)
            current = {"label": body, "poly": None, "basis": None, "squares": []}
        elif key == "poly":
            if current is None or current["poly"] is not None:
                raise CertificateSyntaxError("unexpected 'poly'", lineno)
            current["poly"] = poly(body, lineno)
        elif key == "basis":
            if current is None or current["basis"] is not None:
                raise CertificateSyntaxError("unexpected 'basis'", lineno)
            current["basis"] = [_parse_monomial(t, variables, lineno) for t in body.split()]
        elif key == "square":
            if current is None or current["basis"] is None:
                raise CertificateSyntaxError("'square' before 'basis'", lineno)
            toks = body.split()
            if not toks:
                raise CertificateSyntaxError("empty 'square'", lineno)
            vals = [_parse_rational(t, lineno) for t in toks]
            current["squares"].append((vals[0], vals[1:]))
        elif key == "end":
            if current is None or current["poly"] is None or current["basis"] is None:
                raise CertificateSyntaxError("incomplete part", lineno)
            parts.append(WitnessPart(current["label"], current["poly"], current["basis"],
                                     SosDecomposition(current["squares"])))
            current = None
        else:
            raise CertificateSyntaxError(f"unknown keyword {key!r}", lineno)
    if not saw_format:
        raise CertificateSyntaxError("empty certificate", 1)
    if current is not None:
        raise CertificateSyntaxError("missing 'end'", len(text.splitlines()))
    if variables is None or kind is None:
        raise CertificateSyntaxError("missing 'vars' or 'goal'", len(text.splitlines()))
    return PsatzWitness(kind, variables, parts, assumptions, goal)


def read_certificate(path) -> PsatzWitness:
    with open(path, encoding="utf-8") as fh:
        return parse_certificate(fh.read())


def write_certificate(w: PsatzWitness, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_certificate(w))
