"""Reduction of ``sum_j P_j Q_j = R`` (Q_j sums of squares) to a
block-diagonal semidefinite search space, and its restriction by kernel
vectors.

Coordinates: every block contributes its upper-triangle entries
``(block, i, j)`` with ``i <= j``; a symmetric block-diagonal matrix is a
vector over these entries.  A search space is ``offset + sum_i y_i basis_i``
in that entry space; ``offset`` is the matrix at ``y = 0``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from gmpy2 import mpq

from .linalg import AffineSpace, Infeasible, QMatrix, SparseVec, _axpy, solve_sparse
from .poly import (Monomial, Polynomial, grlex_key, monomials_of_degree,
                   monomials_up_to, newton_halved_monomials, to_rational,
                   variables_check)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BlockStructure:
    sizes: tuple[int, ...]

    @property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for s in self.sizes:
            out.append(acc)
            acc += s
        return tuple(out)

    @property
    def total(self) -> int:
        return sum(self.sizes)

    def __len__(self) -> int:
        return len(self.sizes)


@dataclass
class SosProblem:
    """Find SOS ``Q_j`` (Gram matrices over ``bases[j]``) with
    ``sum_j multiplicands[j] * Q_j == target``.

    ``unit_trace`` lists blocks whose Gram matrix trace is pinned to 1.
    """

    multiplicands: list[tuple[str, Polynomial]]
    target: Polynomial
    bases: list[list[Monomial]]
    unit_trace: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.multiplicands:
            raise ValueError("at least one multiplicand is required")
        if len(self.bases) != len(self.multiplicands):
            raise ValueError("one monomial basis per multiplicand is required")
        if any(not b for b in self.bases):
            raise ValueError("empty monomial basis")
        variables_check([p for _, p in self.multiplicands] + [self.target])

    @property
    def variables(self) -> tuple[str, ...]:
        return self.target.vars


class SdpSearchSpace:
    """Affine family of symmetric block-diagonal rational matrices."""

    def __init__(self, blocks: BlockStructure, offset: SparseVec, basis: list[SparseVec],
                 bases: list[list[Monomial]] | None = None, labels: Sequence[str] | None = None):
        self.blocks = blocks
        self.entries: list[tuple[int, int, int]] = []
        self.index: dict[tuple[int, int, int], int] = {}
        for b, n in enumerate(blocks.sizes):
            for i in range(n):
                for j in range(i, n):
                    self.index[(b, i, j)] = len(self.entries)
                    self.entries.append((b, i, j))
        self.offset = offset
        self.basis = basis
        self.bases = bases
        self.labels = list(labels) if labels is not None else [f"block{b}" for b in range(len(blocks))]
        self.n_constraints: int | None = None

    @classmethod
    def from_matrices(cls, offset: Sequence[QMatrix], basis: Sequence[Sequence[QMatrix]],
                      **kw) -> "SdpSearchSpace":
        """Build from per-block matrices: ``offset[b]`` and ``basis[i][b]``."""
        blocks = BlockStructure(tuple(m.nrows for m in offset))
        space = cls(blocks, {}, [], **kw)
        space.offset = space.vector_from_blocks(offset)
        space.basis = [space.vector_from_blocks(bm) for bm in basis]
        return space

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def nentries(self) -> int:
        return len(self.entries)

    def entry(self, b: int, i: int, j: int) -> int:
        return self.index[(b, i, j) if i <= j else (b, j, i)]

    def vector_from_blocks(self, mats: Sequence[QMatrix]) -> SparseVec:
        if len(mats) != len(self.blocks):
            raise ValueError("one matrix per block expected")
        vec = {}
        for b, m in enumerate(mats):
            if m.shape != (self.blocks.sizes[b],) * 2:
                raise ValueError(f"block {b} has shape {m.shape}")
            if not m.is_symmetric():
                raise ValueError(f"block {b} is not symmetric")
            for i, r in enumerate(m.rows):
                for j, v in r.items():
                    if i <= j and v:
                        vec[self.index[(b, i, j)]] = mpq(v)
        return vec

    def block_matrix(self, vec, b: int) -> QMatrix:
        """Block ``b`` of an entry vector (sparse dict or dense sequence)."""
        n = self.blocks.sizes[b]
        rows = [{} for _ in range(n)]
        items = vec.items() if isinstance(vec, dict) else enumerate(vec)
        for k, v in items:
            if not v:
                continue
            bb, i, j = self.entries[k]
            if bb != b:
                continue
            rows[i][j] = v
            rows[j][i] = v
        return QMatrix(n, n, rows)

    def block_matrices(self, vec) -> list[QMatrix]:
        return [self.block_matrix(vec, b) for b in range(len(self.blocks))]

    def point(self, y: Sequence) -> list[mpq]:
        """Exact entry vector of ``F(y)``."""
        if len(y) != self.dim:
            raise ValueError(f"expected {self.dim} coordinates, got {len(y)}")
        x = [mpq(0)] * self.nentries
        for k, v in self.offset.items():
            x[k] = v
        for yi, bv in zip(y, self.basis):
            yi = to_rational(yi)
            if yi:
                for k, v in bv.items():
                    x[k] += yi * v
        return x

    def matrices(self, y: Sequence) -> list[QMatrix]:
        return self.block_matrices(self.point(y))

    def float_offset(self) -> np.ndarray:
        out = np.zeros(self.nentries)
        for k, v in self.offset.items():
            out[k] = float(v)
        return out

    def float_basis(self) -> np.ndarray:
        out = np.zeros((self.dim, self.nentries))
        for i, bv in enumerate(self.basis):
            for k, v in bv.items():
                out[i, k] = float(v)
        return out

    def float_point(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return self.float_offset() + (y @ self.float_basis() if self.dim else 0.0)

    def block_slices(self, b: int) -> list[QMatrix]:
        """Block ``b`` of the offset and of every basis matrix."""
        return [self.block_matrix(self.offset, b)] + [self.block_matrix(bv, b) for bv in self.basis]

    def kernel_functionals(self, b: int, v: Sequence) -> list[SparseVec]:
        """Entry-space functionals whose vanishing means ``F_b v = 0``."""
        n = self.blocks.sizes[b]
        if len(v) != n:
            raise ValueError(f"kernel vector has length {len(v)}, block {b} has size {n}")
        v = [to_rational(x) for x in v]
        out = []
        for r in range(n):
            f = {}
            for c, vc in enumerate(v):
                if vc:
                    k = self.entry(b, r, c)
                    f[k] = f.get(k, 0) + vc
            f = {k: x for k, x in f.items() if x}
            if f:
                out.append(f)
        return out

    def with_space(self, offset: SparseVec, basis: list[SparseVec]) -> "SdpSearchSpace":
        out = SdpSearchSpace(self.blocks, offset, basis, self.bases, self.labels)
        out.n_constraints = self.n_constraints
        return out

    def __repr__(self) -> str:
        return f"SdpSearchSpace(blocks={list(self.blocks.sizes)}, dim={self.dim})"


# -- basis selection ---------------------------------------------------------------

def select_bases(multiplicands: Sequence[Polynomial], target: Polynomial, degree_bound: int,
                 homogeneous: bool = False) -> list[list[Monomial]]:
    """Monomial bases for the Gram matrices of each multiplier.

    A single multiplicand equal to 1 is the plain SOS case; the basis is the
    halved Newton polytope of the target.  Otherwise the basis for ``P_j``
    holds monomials ``m`` with ``deg m <= degree_bound // 2`` and
    ``deg P_j + 2 deg m <= D``, ``D = max(degree_bound, deg R, max_j deg P_j)``.
    With ``homogeneous`` (and homogeneous inputs) only ``deg m = (D - deg P_j)/2``
    is kept, which is empty when that is not an integer.
    """
    if degree_bound < 0:
        raise ValueError("degree bound must be nonnegative")
    multiplicands = list(multiplicands)
    nv = target.nvars
    if len(multiplicands) == 1 and multiplicands[0] == Polynomial.constant(1, target.vars):
        if target.is_zero():
            return [[]]
        return [newton_halved_monomials(target, homogeneous)]
    D = max([degree_bound, target.degree()] + [p.degree() for p in multiplicands])
    half = degree_bound // 2
    homog = homogeneous and all(p.is_homogeneous() for p in multiplicands) and target.is_homogeneous()
    out = []
    for p in multiplicands:
        room = D - p.degree()
        if homog:
            if room % 2 or room // 2 > half:
                out.append([])
            else:
                out.append(sorted(monomials_of_degree(nv, room // 2), key=grlex_key))
        else:
            out.append(monomials_up_to(nv, min(half, room // 2)))
    return out


# -- system (S) ----------------------------------------------------------------------

def coefficient_equations(problem: SosProblem, space: SdpSearchSpace):
    """Rows/rhs equating each coefficient of ``sum_j P_j Q_j - R`` to zero."""
    eqs: dict[Monomial, dict[int, mpq]] = {}
    for b, ((_, pj), basis) in enumerate(zip(problem.multiplicands, problem.bases)):
        for i, mi in enumerate(basis):
            for j in range(i, len(basis)):
                k = space.index[(b, i, j)]
                mult = 1 if i == j else 2
                mono = tuple(x + y for x, y in zip(mi, basis[j]))
                for e, c in pj.terms.items():
                    mu = tuple(x + y for x, y in zip(e, mono))
                    row = eqs.setdefault(mu, {})
                    row[k] = row.get(k, 0) + mult * c
    for mu in problem.target.terms:
        eqs.setdefault(mu, {})
    rows, rhs = [], []
    for mu in sorted(eqs, key=grlex_key, reverse=True):
        rows.append({k: v for k, v in eqs[mu].items() if v})
        rhs.append(problem.target.coefficient(mu))
    for b in problem.unit_trace:
        rows.append({space.index[(b, i, i)]: mpq(1) for i in range(len(problem.bases[b]))})
        rhs.append(mpq(1))
    return rows, rhs


def build_search_space(problem: SosProblem) -> SdpSearchSpace | Infeasible:
    """Exact parametrization of all symmetric block matrices satisfying the
    coefficient identity (PSD-ness not yet imposed)."""
    blocks = BlockStructure(tuple(len(b) for b in problem.bases))
    labels = [name for name, _ in problem.multiplicands]
    space = SdpSearchSpace(blocks, {}, [], [list(b) for b in problem.bases], labels)
    rows, rhs = coefficient_equations(problem, space)
    sol = solve_sparse(rows, rhs, space.nentries)
    if not sol:
        return Infeasible("no symmetric matrices satisfy the identity with these bases")
    space.offset = sol.offset
    space.basis = sol.basis
    log.debug("system (S): %d equations, %d unknowns, search space dimension %d",
              len(rows), space.nentries, space.dim)
    space.n_constraints = len(rows)
    return space


def restrict_search_space(space: SdpSearchSpace,
                          kernel_vectors: Sequence[tuple[int, Sequence]]) -> SdpSearchSpace | Infeasible:
    """Intersect the family with ``{F : F_b v = 0}`` for every ``(b, v)``."""
    functionals = []
    for b, v in kernel_vectors:
        functionals.extend(space.kernel_functionals(b, v))
    if not functionals:
        return space
    # column view of the basis: entry -> [(i, value)]
    by_entry: dict[int, list[tuple[int, mpq]]] = {}
    for i, bv in enumerate(space.basis):
        for k, v in bv.items():
            by_entry.setdefault(k, []).append((i, v))
    rows, rhs = [], []
    for f in functionals:
        row: dict[int, mpq] = {}
        const = mpq(0)
        for k, a in f.items():
            const += a * space.offset.get(k, 0)
            for i, v in by_entry.get(k, ()):
                row[i] = row.get(i, 0) + a * v
        rows.append({i: v for i, v in row.items() if v})
        rhs.append(-const)
    sol = solve_sparse(rows, rhs, space.dim)
    if not sol:
        return Infeasible("no matrix of the search space annihilates the kernel vectors")
    return space.with_space(*_compose(space, sol))


def _compose(space: SdpSearchSpace, sol: AffineSpace) -> tuple[SparseVec, list[SparseVec]]:
    offset = dict(space.offset)
    for i, c in sol.offset.items():
        _axpy(offset, c, space.basis[i])
    basis = []
    for direction in sol.basis:
        vec: SparseVec = {}
        for i, c in direction.items():
            _axpy(vec, c, space.basis[i])
        basis.append(vec)
    return offset, basis
