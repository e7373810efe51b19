"""Exact rational matrices: echelon forms, affine solution spaces, row spans
and characteristic polynomials.

Rows are stored sparsely (``dict`` column -> ``mpq``); the systems built from
Gram-matrix coefficient matching touch only a handful of entries per row.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from gmpy2 import mpq

from .poly import Polynomial, to_rational

SparseVec = dict  # column index -> nonzero mpq


class QMatrix:
    """Rational matrix with sparse row storage."""

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, nrows: int, ncols: int, rows: Sequence[SparseVec] | None = None):
        self.nrows = nrows
        self.ncols = ncols
        if rows is None:
            rows = [{} for _ in range(nrows)]
        if len(rows) != nrows:
            raise ValueError("row count mismatch")
        for r in rows:
            for c in r:
                if not 0 <= c < ncols:
                    raise IndexError(f"column {c} out of bounds for {ncols} columns")
        self.rows = [{c: to_rational(v) for c, v in r.items() if v} for r in rows]

    @classmethod
    def from_dense(cls, data, ncols: int | None = None) -> "QMatrix":
        data = [list(r) for r in data]
        if ncols is None:
            ncols = len(data[0]) if data else 0
        return cls(len(data), ncols, [{j: v for j, v in enumerate(r) if v} for r in data])

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        return cls(n, n, [{i: 1} for i in range(n)])

    @classmethod
    def diag(cls, values) -> "QMatrix":
        values = list(values)
        n = len(values)
        return cls(n, n, [{i: v} for i, v in enumerate(values)])

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "QMatrix":
        return cls(nrows, ncols)

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, idx) -> mpq:
        i, j = idx
        if not (0 <= i < self.nrows and 0 <= j < self.ncols):
            raise IndexError(idx)
        return self.rows[i].get(j, mpq(0))

    def row(self, i: int) -> list[mpq]:
        r = self.rows[i]
        return [r.get(j, mpq(0)) for j in range(self.ncols)]

    def to_dense(self) -> list[list[mpq]]:
        return [self.row(i) for i in range(self.nrows)]

    def to_float(self) -> np.ndarray:
        out = np.zeros((self.nrows, self.ncols))
        for i, r in enumerate(self.rows):
            for j, v in r.items():
                out[i, j] = float(v)
        return out

    def transpose(self) -> "QMatrix":
        cols = [{} for _ in range(self.ncols)]
        for i, r in enumerate(self.rows):
            for j, v in r.items():
                cols[j][i] = v
        return QMatrix(self.ncols, self.nrows, cols)

    @property
    def T(self) -> "QMatrix":
        return self.transpose()

    def is_symmetric(self) -> bool:
        if self.nrows != self.ncols:
            return False
        return all(self.rows[j].get(i, 0) == v
                   for i, r in enumerate(self.rows) for j, v in r.items())

    def is_zero(self) -> bool:
        return not any(self.rows)

    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = []
        for r in self.rows:
            acc: dict = {}
            for k, a in r.items():
                for j, b in other.rows[k].items():
                    acc[j] = acc.get(j, 0) + a * b
            out.append({j: v for j, v in acc.items() if v})
        return QMatrix(self.nrows, other.ncols, out)

    def __add__(self, other: "QMatrix") -> "QMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return QMatrix(self.nrows, self.ncols, [_axpy(dict(a), 1, b) for a, b in zip(self.rows, other.rows)])

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return QMatrix(self.nrows, self.ncols, [_axpy(dict(a), -1, b) for a, b in zip(self.rows, other.rows)])

    def scale(self, c) -> "QMatrix":
        c = to_rational(c)
        return QMatrix(self.nrows, self.ncols, [{j: v * c for j, v in r.items()} for r in self.rows])

    def apply(self, vec: Sequence) -> list[mpq]:
        """Matrix-vector product."""
        vec = [to_rational(v) for v in vec]
        return [sum((v * vec[j] for j, v in r.items()), mpq(0)) for r in self.rows]

    def __eq__(self, other) -> bool:
        if not isinstance(other, QMatrix):
            return NotImplemented
        return self.shape == other.shape and self.rows == other.rows

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(v) for v in self.row(i)) for i in range(self.nrows))
        return f"QMatrix({self.nrows}x{self.ncols} [{body}])"


def _axpy(row: SparseVec, f, other: SparseVec) -> SparseVec:
    """row += f * other, in place, dropping zeros."""
    for k, v in other.items():
        nv = row.get(k, 0) + f * v
        if nv:
            row[k] = nv
        else:
            row.pop(k, None)
    return row


class Echelon:
    """Incrementally maintained reduced row echelon basis.

    Each stored row has a leading 1 at its pivot column and no entries in
    any other pivot column, so sorting rows by pivot gives the RREF.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.pivot_rows: dict[int, SparseVec] = {}

    @property
    def rank(self) -> int:
        return len(self.pivot_rows)

    def reduce(self, row: SparseVec) -> SparseVec:
        row = {c: v for c, v in row.items() if v}
        for c in [c for c in row if c in self.pivot_rows]:
            f = row.get(c)
            if f:
                _axpy(row, -f, self.pivot_rows[c])
        return row

    def add(self, row: SparseVec) -> bool:
        """Insert a row; returns False when it was already in the span."""
        row = self.reduce(row)
        if not row:
            return False
        p = min(row)
        inv = 1 / row[p]
        row = {c: v * inv for c, v in row.items()}
        for other in self.pivot_rows.values():
            f = other.get(p)
            if f:
                _axpy(other, -f, row)
        self.pivot_rows[p] = row
        return True

    def pivots(self) -> list[int]:
        return sorted(self.pivot_rows)

    def matrix(self) -> QMatrix:
        return QMatrix(self.rank, self.ncols, [self.pivot_rows[p] for p in self.pivots()])


def rref(m: QMatrix) -> tuple[QMatrix, list[int]]:
    """Reduced row echelon form and pivot columns; zero rows are dropped."""
    ech = Echelon(m.ncols)
    for r in m.rows:
        ech.add(r)
    return ech.matrix(), ech.pivots()


def rank(m: QMatrix) -> int:
    return len(rref(m)[1])


class Infeasible:
    """Falsy marker for an empty affine solution set, with a reason."""

    __slots__ = ("reason",)

    def __init__(self, reason: str = "inconsistent linear system"):
        self.reason = reason

    def __bool__(self) -> bool:
        return False

    def __repr__(self) -> str:
        return f"Infeasible({self.reason!r})"


@dataclass
class AffineSpace:
    """``{offset + sum t_i basis_i}`` in Q^n, vectors stored sparsely."""

    n: int
    offset: SparseVec = field(default_factory=dict)
    basis: list[SparseVec] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def point(self, t: Sequence) -> list[mpq]:
        if len(t) != self.dim:
            raise ValueError(f"expected {self.dim} parameters, got {len(t)}")
        x = [mpq(0)] * self.n
        for c, v in self.offset.items():
            x[c] = v
        for ti, b in zip(t, self.basis):
            ti = to_rational(ti)
            if ti:
                for c, v in b.items():
                    x[c] += ti * v
        return x

    def dense_offset(self) -> list[mpq]:
        return [self.offset.get(c, mpq(0)) for c in range(self.n)]

    def dense_basis(self) -> list[list[mpq]]:
        return [[b.get(c, mpq(0)) for c in range(self.n)] for b in self.basis]


def solve_sparse(rows: Iterable[SparseVec], rhs: Iterable, n: int) -> AffineSpace | Infeasible:
    """Solve ``A x = b`` for sparse rows of A; see :func:`solve_affine`."""
    ech = Echelon(n + 1)
    for row, b in zip(rows, rhs):
        aug = dict(row)
        b = to_rational(b)
        if b:
            aug[n] = b
        ech.add(aug)
        if n in ech.pivot_rows:
            return Infeasible("rank(A) < rank([A|b])")
    offset = {}
    by_col: dict[int, list[tuple[int, mpq]]] = {}
    for p, row in ech.pivot_rows.items():
        for c, v in row.items():
            if c == n:
                offset[p] = v
            elif c != p:
                by_col.setdefault(c, []).append((p, v))
    basis = []
    for f in range(n):
        if f in ech.pivot_rows:
            continue
        vec = {f: mpq(1)}
        for p, v in by_col.get(f, ()):
            vec[p] = -v
        basis.append(vec)
    return AffineSpace(n, offset, basis)


def solve_affine(A: QMatrix, b: Sequence) -> AffineSpace | Infeasible:
    """Parametrize ``{x : A x = b}`` exactly.

    Free variables are the non-pivot columns of the RREF; basis vector k has
    a 1 at the k-th free column.  Returns :class:`Infeasible` (falsy) when
    the system is inconsistent.
    """
    if len(b) != A.nrows:
        raise ValueError("right-hand side length mismatch")
    return solve_sparse(A.rows, b, A.ncols)


def row_span_basis(ms: Sequence[QMatrix], ncols: int | None = None) -> QMatrix:
    """Full-row-rank matrix whose rows span the union of the row spaces.

    For symmetric inputs this is a basis of the orthogonal complement of the
    common kernel.
    """
    if ncols is None:
        if not ms:
            raise ValueError("column count needed for an empty list")
        ncols = ms[0].ncols
    ech = Echelon(ncols)
    for m in ms:
        if m.ncols != ncols:
            raise ValueError("column count mismatch")
        for r in m.rows:
            if r:
                ech.add(r)
                if ech.rank == ncols:
                    return ech.matrix()
    return ech.matrix()


def charpoly(m: QMatrix, var: str = "lam") -> Polynomial:
    """``det(lam*I - m)`` by Faddeev-LeVerrier in exact arithmetic."""
    n = m.nrows
    if n != m.ncols:
        raise ValueError("charpoly needs a square matrix")
    A = m.to_dense()
    coeffs = [mpq(0)] * (n + 1)  # coeffs[k] multiplies lam^k
    coeffs[n] = mpq(1)
    M = [[mpq(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{n-k+1} I
        AM = _dense_mul(A, M)
        c_prev = coeffs[n - k + 1]
        for i in range(n):
            AM[i][i] += c_prev
        M = AM
        AMk = _dense_mul(A, M)
        coeffs[n - k] = -sum((AMk[i][i] for i in range(n)), mpq(0)) / k
    return Polynomial({(k,): c for k, c in enumerate(coeffs)}, (var,))


def _dense_mul(A, B):
    n = len(A)
    if not n:
        return []
    p = len(B[0])
    out = [[mpq(0)] * p for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        oi = out[i]
        for k, a in enumerate(Ai):
            if a:
                Bk = B[k]
                for j in range(p):
                    b = Bk[j]
                    if b:
                        oi[j] += a * b
    return out
