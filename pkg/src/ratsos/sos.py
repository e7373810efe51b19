"""Sums of squares of linear forms, and their expansion into polynomials.

This module and :mod:`ratsos.poly` are all that certificate checking needs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from gmpy2 import mpq

from .poly import Monomial, Polynomial, to_rational


@dataclass
class SosDecomposition:
    """``sum_i c_i * (v_i . x)^2`` with every ``c_i > 0``.

    Over a monomial basis ``m`` this is the polynomial
    ``sum_i c_i * (sum_k v_i[k] * m_k)^2``; as a matrix it is
    ``sum_i c_i v_i^T v_i``.
    """

    terms: list[tuple[mpq, list[mpq]]] = field(default_factory=list)

    def __post_init__(self):
        self.terms = [(to_rational(c), [to_rational(x) for x in v]) for c, v in self.terms]

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        # a decomposition is a success even when empty (the zero matrix)
        return True

    def __iter__(self):
        return iter(self.terms)

    def gram(self, n: int) -> list[list[mpq]]:
        """Dense ``sum_i c_i v_i^T v_i``."""
        out = [[mpq(0)] * n for _ in range(n)]
        for c, v in self.terms:
            if len(v) != n:
                raise ValueError(f"vector of length {len(v)} in a size-{n} decomposition")
            for i, vi in enumerate(v):
                if vi:
                    cvi = c * vi
                    row = out[i]
                    for j, vj in enumerate(v):
                        if vj:
                            row[j] += cvi * vj
        return out


def linear_form(vector: Sequence, basis: Sequence[Monomial], variables: Sequence[str]) -> Polynomial:
    if len(vector) != len(basis):
        raise ValueError(f"vector has {len(vector)} entries for a basis of {len(basis)} monomials")
    return Polynomial({tuple(m): c for m, c in zip(basis, vector) if c}, variables)


def expand_sos(decomposition: SosDecomposition, basis: Sequence[Monomial],
               variables: Sequence[str]) -> Polynomial:
    """The polynomial ``sum_i c_i * L_i^2`` with ``L_i = v_i . basis``."""
    total = Polynomial({}, variables)
    for c, v in decomposition.terms:
        form = linear_form(v, basis, variables)
        total = total + form * form * c
    return total
