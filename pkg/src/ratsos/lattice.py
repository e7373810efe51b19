"""Exact integer LLL, kernel-vector discovery from near-singular float
matrices, and LLL-based simplification of numeric solutions."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from gmpy2 import mpq, mpz

from .linalg import QMatrix
from .poly import to_rational

log = logging.getLogger(__name__)

DELTA = Fraction(99, 100)
ALPHA0 = 1e15
BETA = 10.0
GAMMA = 10.0
SIMPLIFY_BETA = 10 ** 19
MU_SCHEDULE = tuple(2 ** 8 * 4 ** k for k in range(12))


def round_half_away(x) -> int:
    """Nearest integer, ties away from zero; exact for rationals and floats."""
    q = Fraction(x)
    n = abs(q.numerator) * 2 + q.denominator
    r = n // (2 * q.denominator)
    return r if q >= 0 else -r


def lll_reduce(basis: Sequence[Sequence[int]], delta=DELTA) -> list[list[int]]:
    """LLL-reduce the rows of an integer matrix (integral Gram-Schmidt).

    All arithmetic is on integers: ``d[i]`` are the leading Gram
    determinants and ``lam[k][j] = d[j+1] * mu[k][j]``.  Raises ValueError
    on linearly dependent rows.
    """
    delta = Fraction(delta)
    if not Fraction(1, 4) < delta <= 1:
        raise ValueError("delta must lie in (1/4, 1]")
    p, q = delta.numerator, delta.denominator
    b = [[mpz(x) for x in row] for row in basis]
    n = len(b)
    if n == 0:
        return []
    if len({len(r) for r in b}) != 1:
        raise ValueError("rows of different lengths")

    def dot(u, v):
        return sum((x * y for x, y in zip(u, v)), mpz(0))

    # 1-based d: d[0] = 1, d[i] = det Gram(b_1..b_i)
    d = [mpz(1)] + [mpz(0)] * n
    lam = [[mpz(0)] * n for _ in range(n)]

    def gram_schmidt_row(k):
        for j in range(k + 1):
            u = dot(b[k], b[j])
            for i in range(j):
                u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
            if j < k:
                lam[k][j] = u
            else:
                if u == 0:
                    raise ValueError("basis rows are linearly dependent")
                d[k + 1] = u

    def reduce(k, l):
        if 2 * abs(lam[k][l]) > d[l + 1]:
            r = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            b[k] = [x - r * y for x, y in zip(b[k], b[l])]
            lam[k][l] -= r * d[l + 1]
            for i in range(l):
                lam[k][i] -= r * lam[l][i]

    def swap(k, kmax):
        b[k], b[k - 1] = b[k - 1], b[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lk = lam[k][k - 1]
        B = (d[k - 1] * d[k + 1] + lk * lk) // d[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - lk * t) // d[k]
            lam[i][k - 1] = (B * t + lk * lam[i][k]) // d[k + 1]
        d[k] = B

    gram_schmidt_row(0)
    k, kmax = 1, 0
    while k < n:
        if k > kmax:
            kmax = k
            gram_schmidt_row(k)
        reduce(k, k - 1)
        if q * d[k + 1] * d[k - 1] < p * d[k] * d[k] - q * lam[k][k - 1] ** 2:
            swap(k, kmax)
            k = max(1, k - 1)
            continue
        for l in range(k - 2, -1, -1):
            reduce(k, l)
        k += 1
    return [[int(x) for x in row] for row in b]


def gram_schmidt(basis: Sequence[Sequence[int]]) -> tuple[list[list[Fraction]], list[list[Fraction]]]:
    """Rational Gram-Schmidt vectors and mu coefficients (for checks)."""
    n = len(basis)
    bstar: list[list[Fraction]] = []
    mu = [[Fraction(0)] * n for _ in range(n)]
    for i, row in enumerate(basis):
        v = [Fraction(x) for x in row]
        for j in range(i):
            num = sum(Fraction(a) * b for a, b in zip(row, bstar[j]))
            den = sum(b * b for b in bstar[j])
            mu[i][j] = num / den
            v = [a - mu[i][j] * b for a, b in zip(v, bstar[j])]
        bstar.append(v)
    return bstar, mu


def is_lll_reduced(basis: Sequence[Sequence[int]], delta=DELTA) -> bool:
    delta = Fraction(delta)
    bstar, mu = gram_schmidt(basis)
    norms = [sum(x * x for x in v) for v in bstar]
    for i in range(len(basis)):
        for j in range(i):
            if abs(mu[i][j]) > Fraction(1, 2):
                return False
    for k in range(1, len(basis)):
        if norms[k] < (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            return False
    return True


# -- kernel vectors -------------------------------------------------------------------

@dataclass
class KernelCandidates:
    vectors: list[list[mpq]] = field(default_factory=list)  # v = w B, uncompressed
    ws: list[list[int]] = field(default_factory=list)
    w_l1: list[float] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)  # ||G w||_2

    def __len__(self) -> int:
        return len(self.vectors)


def lift(w: Sequence[int], B: QMatrix) -> list[mpq]:
    """``v = w B`` exactly."""
    if len(w) != B.nrows:
        raise ValueError("w length does not match B")
    v = [mpq(0)] * B.ncols
    for wi, row in zip(w, B.rows):
        if wi:
            for j, x in row.items():
                v[j] += wi * x
    return v


def find_kernel_vectors(G: np.ndarray, B: QMatrix, alpha0: float = ALPHA0,
                        beta: float = BETA, gamma: float = GAMMA,
                        delta=DELTA) -> KernelCandidates:
    """Short integer ``w`` with ``G w`` small, lifted to ``v = w B``.

    Reduces the rows ``(e_i | round(alpha G)_i)`` with
    ``alpha = alpha0 / ||G||_F``.  The first reduced row is always kept;
    later rows are kept when ``||w||_1 <= beta ||w1||_1`` and
    ``||G w||_2 <= gamma ||G w1||_2``.
    """
    k = G.shape[0]
    out = KernelCandidates()
    if k == 0:
        return out
    G = (G + G.T) / 2
    norm = float(np.linalg.norm(G))
    alpha = alpha0 / norm if norm > 0 else 0.0
    M = [[round_half_away(alpha * G[i, j]) for j in range(k)] for i in range(k)]
    rows = [[1 if c == i else 0 for c in range(k)] + M[i] for i in range(k)]
    reduced = lll_reduce(rows, delta)
    ws = [r[:k] for r in reduced]
    w1 = ws[0]
    l1_first = float(sum(abs(x) for x in w1))
    res_first = float(np.linalg.norm(G @ np.array(w1, dtype=float)))
    for idx, w in enumerate(ws):
        l1 = float(sum(abs(x) for x in w))
        res = float(np.linalg.norm(G @ np.array(w, dtype=float)))
        if idx and not (l1 <= beta * l1_first and res <= gamma * res_first):
            continue
        out.ws.append(w)
        out.vectors.append(lift(w, B))
        out.w_l1.append(l1)
        out.residuals.append(res)
    log.debug("kernel search: size %d, %d candidate(s), first |Gw|=%.3e", k, len(out), res_first)
    return out


# -- coefficient simplification --------------------------------------------------------

class NoImprovement:
    """Falsy outcome of :func:`simplify_solution`."""

    def __init__(self, reason: str = "no simpler point found"):
        self.reason = reason

    def __bool__(self) -> bool:
        return False

    def __repr__(self) -> str:
        return f"NoImprovement({self.reason!r})"


def simplify_solution(v_float: Sequence[float], f0: Sequence, fs: Sequence[Sequence],
                      accept: Callable[[list[mpq]], bool] | None = None,
                      mu_schedule: Sequence = MU_SCHEDULE,
                      beta_big=SIMPLIFY_BETA) -> list[mpq] | NoImprovement:
    """Rational ``y'`` with ``f0 + sum y'_i f_i ~ v`` and small numerators.

    For each ``mu`` the rows
    ``(Z(beta mu (f0 - v)), Z(beta f0), 1, 0..)`` and
    ``(Z(beta mu f_i), Z(beta f_i), e_i)`` are LLL-reduced; the first
    reduced row with a nonzero ``y_0`` gives ``y'_i = y_i / y_0``.  The
    first ``y'`` passing ``accept`` is returned.
    """
    m = len(fs)
    N = len(f0)
    v = [Fraction(float(x)) for x in v_float]
    if len(v) != N or any(len(f) != N for f in fs):
        raise ValueError("vector lengths disagree")
    f0q = [Fraction(to_rational(x)) for x in f0]
    fq = [[Fraction(to_rational(x)) for x in f] for f in fs]
    beta_big = Fraction(beta_big)
    for mu in mu_schedule:
        bm = beta_big * Fraction(mu)
        rows = [[round_half_away(bm * (a - b)) for a, b in zip(f0q, v)]
                + [round_half_away(beta_big * a) for a in f0q]
                + [1] + [0] * m]
        for i, f in enumerate(fq):
            rows.append([round_half_away(bm * a) for a in f]
                        + [round_half_away(beta_big * a) for a in f]
                        + [0] * (i + 1) + [1] + [0] * (m - i - 1))
        reduced = lll_reduce(rows)
        for r in reduced:
            y0 = r[2 * N]
            if y0:
                y = [mpq(r[2 * N + 1 + i], y0) for i in range(m)]
                if accept is None or accept(y):
                    log.debug("simplified with mu=%s", mu)
                    return y
                break
    return NoImprovement("mu schedule exhausted")
