"""Problem files.

::

    # comment
    vars y
    assume -2 + y^2 >= 0
    assume 1 - y^4 >= 0
    goal unsat

or ``goal nonneg <poly>`` (without assumptions).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .poly import ParseError, Polynomial, parse_polynomial

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_LINE = re.compile(r"(\S+)\s*(.*)\Z")


@dataclass
class ProblemFile:
    variables: tuple[str, ...]
    goal: str  # "unsat" or "nonneg"
    assumptions: list[Polynomial] = field(default_factory=list)
    target: Polynomial | None = None


def parse_problem(text: str) -> ProblemFile:
    """Parse a problem file; errors are :class:`ParseError` with positions."""
    variables: tuple[str, ...] | None = None
    goal = None
    target = None
    assumptions: list[Polynomial] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        stripped = line.strip()
        if not stripped:
            continue
        indent = len(line) - len(line.lstrip())
        m = _LINE.match(stripped)
        key, rest = m.group(1), m.group(2).rstrip()
        body_col = indent + m.start(2) + 1
        vs = variables or ()
        if key == "vars":
            if variables is not None:
                raise ParseError("repeated 'vars' line", lineno, indent + 1)
            names = rest.split()
            if not names:
                raise ParseError("'vars' needs at least one name", lineno, indent + 1)
            for n in names:
                if not _IDENT.match(n):
                    raise ParseError(f"bad variable name {n!r}", lineno, line.find(n) + 1)
            if len(set(names)) != len(names):
                raise ParseError("repeated variable name", lineno, body_col)
            variables = tuple(names)
        elif key == "assume":
            lhs, sep, rhs = rest.rpartition(">=")
            if not sep:
                raise ParseError("expected '<poly> >= 0'", lineno, body_col)
            if rhs.strip() != "0":
                raise ParseError("right-hand side must be 0", lineno,
                                 body_col + len(lhs) + 2 + (len(rhs) - len(rhs.lstrip())))
            if not lhs.strip():
                raise ParseError("missing polynomial", lineno, body_col)
            assumptions.append(parse_polynomial(lhs, vs, line=lineno, column=body_col))
        elif key == "goal":
            if goal is not None:
                raise ParseError("repeated 'goal' line", lineno, indent + 1)
            kind, _, poly_text = rest.partition(" ")
            poly_text = poly_text.strip()
            if kind == "unsat" and not poly_text.strip():
                goal = "unsat"
            elif kind == "nonneg" and poly_text.strip():
                goal = "nonneg"
                target = parse_polynomial(poly_text, vs, line=lineno,
                                          column=body_col + rest.index(poly_text))
            else:
                raise ParseError("expected 'goal unsat' or 'goal nonneg <poly>'", lineno, body_col)
        else:
            raise ParseError(f"unknown keyword {key!r}", lineno, indent + 1)
    nlines = max(1, len(text.splitlines()))
    if goal is None:
        raise ParseError("missing 'goal' line", nlines, 1)
    if variables is None:
        variables = ()
    if goal == "unsat" and not assumptions:
        raise ParseError("'goal unsat' needs at least one 'assume' line", nlines, 1)
    if goal == "nonneg":
        if assumptions:
            raise ParseError("'goal nonneg' takes no 'assume' lines", nlines, 1)
        if target.is_zero():
            raise ParseError("nonneg goal polynomial is zero", nlines, 1)
    return ProblemFile(variables, goal, assumptions, target)
