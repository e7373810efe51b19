"""Floating-point SDP feasibility on compressed search spaces.

The internal solver is a primal log-barrier method for

    maximize t  subject to  G_b(y) - t I >= 0 for every block b,
                            trace F(y) <= R,

so strictly feasible spaces yield a point maximizing the smallest
eigenvalue and degenerate ones converge toward the relative interior of
the optimal face with ``t ~ 0``.  The trace cap only keeps the feasible
set bounded; ``R`` is chosen far away from the starting point.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.linalg

from .linalg import QMatrix, row_span_basis
from .reduce import SdpSearchSpace

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 500


class NonConvergence(RuntimeError):
    """The barrier iteration hit its cap before reaching the requested gap."""


@dataclass
class FloatSpace:
    """Compressed float blocks ``G_b(y) = C_b + sum_i y_i A_{i,b}``.

    ``C_b = B_b F_offset B_b^T`` and ``A_{i,b} = B_b F_i B_b^T``; ``B`` keeps
    the exact compression matrices for lifting kernel vectors back.
    """

    offset: list[np.ndarray]
    basis: list[np.ndarray]  # per block, shape (m, k, k)
    B: list[QMatrix]
    dim: int
    trace_offset: float = 0.0
    trace_basis: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def sizes(self) -> list[int]:
        return [c.shape[0] for c in self.offset]

    def block(self, y, b: int) -> np.ndarray:
        C = self.offset[b]
        if self.dim == 0 or C.shape[0] == 0:
            return C.copy()
        return C + np.tensordot(np.asarray(y, dtype=float), self.basis[b], axes=1)

    def matrices(self, y) -> list[np.ndarray]:
        return [self.block(y, b) for b in range(len(self.offset))]

    def min_eigenvalues(self, y) -> list[float]:
        return [float(np.linalg.eigvalsh(G)[0]) if G.shape[0] else float("inf")
                for G in self.matrices(y)]


def _block_arrays(space: SdpSearchSpace, b: int) -> tuple[np.ndarray, np.ndarray]:
    n = space.blocks.sizes[b]
    m = space.dim
    C = np.zeros((n, n))
    A = np.zeros((m, n, n))
    for k, v in space.offset.items():
        bb, i, j = space.entries[k]
        if bb == b:
            C[i, j] = C[j, i] = float(v)
    for idx, bv in enumerate(space.basis):
        for k, v in bv.items():
            bb, i, j = space.entries[k]
            if bb == b:
                A[idx, i, j] = A[idx, j, i] = float(v)
    return C, A


def compression_bases(space: SdpSearchSpace) -> list[QMatrix]:
    """Per block, a row basis of the complement of the common kernel."""
    return [row_span_basis(space.block_slices(b), space.blocks.sizes[b])
            for b in range(len(space.blocks))]


def compress(space: SdpSearchSpace, B: Sequence[QMatrix] | None = None) -> FloatSpace:
    """Float blocks ``B F B^T``; directions in the common kernel are dropped."""
    if B is None:
        B = compression_bases(space)
    offsets, bases = [], []
    trace_offset = 0.0
    trace_basis = np.zeros(space.dim)
    for b in range(len(space.blocks)):
        C, A = _block_arrays(space, b)
        trace_offset += float(np.trace(C))
        if space.dim:
            trace_basis += np.trace(A, axis1=1, axis2=2)
        Bf = B[b].to_float()
        Gc = Bf @ C @ Bf.T
        Ga = np.einsum("ij,mjk,lk->mil", Bf, A, Bf) if space.dim else np.zeros((0,) + Gc.shape)
        offsets.append((Gc + Gc.T) / 2)
        bases.append((Ga + np.swapaxes(Ga, 1, 2)) / 2)
    return FloatSpace(offsets, bases, list(B), space.dim, trace_offset, trace_basis)


@dataclass
class NumericSolution:
    y: np.ndarray
    t: float
    min_eigs: list[float]
    iterations: int
    feasible: bool
    t_history: list[float] = field(default_factory=list)


def _factor(fs: FloatSpace, y, t):
    """Cholesky factors of every nonempty ``G_b(y) - t I``; None if not PD."""
    out = []
    for b, k in enumerate(fs.sizes):
        if k == 0:
            out.append(None)
            continue
        S = fs.block(y, b) - t * np.eye(k)
        try:
            out.append(np.linalg.cholesky(S))
        except np.linalg.LinAlgError:
            return None
    return out


def _barrier(fs: FloatSpace, factors, y, R) -> float:
    val = 0.0
    for L in factors:
        if L is not None:
            val -= 2.0 * np.sum(np.log(np.diag(L)))
    h = R - fs.trace_offset - (fs.trace_basis @ y if fs.dim else 0.0)
    if h <= 0:
        return np.inf
    return val - np.log(h)


def solve_feasibility(fs: FloatSpace, warm_start=None, tol: float = DEFAULT_TOL,
                      max_iter: int = DEFAULT_MAX_ITER, infeasible_tol: float = 1e-6) -> NumericSolution:
    """Approximately maximize ``t`` with ``G(y) >= t I`` blockwise.

    ``feasible`` is False when the optimum ``t`` is below
    ``-infeasible_tol * scale``.  Raises :class:`NonConvergence` after
    ``max_iter`` Newton steps.
    """
    m = fs.dim
    sizes = fs.sizes
    ntot = sum(sizes)
    y = np.zeros(m) if warm_start is None else np.array(warm_start, dtype=float)
    if y.shape != (m,):
        raise ValueError(f"warm start has shape {y.shape}, expected ({m},)")
    if ntot == 0:
        return NumericSolution(y, 0.0, [float("inf")] * len(sizes), 0, True, [0.0])

    eigs = [np.linalg.eigvalsh(fs.block(y, b)) for b, k in enumerate(sizes) if k]
    lam_min = min(float(e[0]) for e in eigs)
    scale = max(1.0, max(float(np.max(np.abs(e))) for e in eigs))
    t = lam_min - scale
    R = fs.trace_offset + (fs.trace_basis @ y if m else 0.0) + 1e3 * scale * ntot
    nu = ntot + 1.0
    tau = 1.0 / scale
    gap_target = tol * scale
    ident = [np.eye(k) for k in sizes]

    iters = 0
    best = t
    history = [t]
    z = np.append(y, t)
    factors = _factor(fs, y, t)
    while True:
        # centering by damped Newton
        for _ in range(100):
            y, t = z[:m], z[m]
            grad = np.zeros(m + 1)
            H = np.zeros((m + 1, m + 1))
            grad[m] = -tau
            for b, L in enumerate(factors):
                if L is None:
                    continue
                k = sizes[b]
                Linv = scipy.linalg.solve_triangular(L, ident[b], lower=True)
                Wy = Linv @ fs.basis[b] @ Linv.T if m else np.zeros((0, k, k))
                Wt = -(Linv @ Linv.T)
                W = np.concatenate([Wy.reshape(m, k * k), Wt.reshape(1, k * k)])
                grad -= W @ ident[b].reshape(-1)
                H += W @ W.T
            h = R - fs.trace_offset - (fs.trace_basis @ y if m else 0.0)
            a = np.append(fs.trace_basis, 0.0) if m else np.zeros(1)
            grad += a / h
            H += np.outer(a, a) / h ** 2
            dz = _newton_direction(H, grad)
            dec2 = float(-grad @ dz)
            iters += 1
            if iters > max_iter:
                raise NonConvergence(f"no convergence after {max_iter} Newton steps (t={t:.3e})")
            if dec2 / 2 <= 1e-9:
                break
            # backtracking line search keeping every block positive definite
            f0 = -tau * t + _barrier(fs, factors, y, R)
            step = 1.0
            while step > 1e-14:
                zn = z + step * dz
                fn_factors = _factor(fs, zn[:m], zn[m])
                if fn_factors is not None:
                    fn = -tau * zn[m] + _barrier(fs, fn_factors, zn[:m], R)
                    if fn <= f0 - 0.25 * step * dec2:
                        break
                step *= 0.5
            else:
                break
            z = zn
            factors = fn_factors
            best = max(best, float(z[m]))
            history.append(best)
        if nu / tau < gap_target:
            break
        tau *= 10.0

    y, t = z[:m].copy(), float(z[m])
    min_eigs = fs.min_eigenvalues(y)
    feasible = t >= -infeasible_tol * scale
    return NumericSolution(y, t, min_eigs, iters, feasible, history)


def _newton_direction(H: np.ndarray, grad: np.ndarray) -> np.ndarray:
    d = np.sqrt(np.maximum(np.diag(H), 1e-300))
    Hs = H / np.outer(d, d)
    try:
        c, low = scipy.linalg.cho_factor(Hs, lower=True, check_finite=False)
        return -scipy.linalg.cho_solve((c, low), grad / d) / d
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
        return -np.linalg.lstsq(Hs, grad / d, rcond=None)[0] / d


def _entry_weights(space: SdpSearchSpace) -> np.ndarray:
    # off-diagonal entries occur twice in the Frobenius norm
    return np.array([1.0 if i == j else np.sqrt(2.0) for _, i, j in space.entries])


def warm_start_projection(previous_y, old: SdpSearchSpace, new: SdpSearchSpace) -> np.ndarray:
    """``y'`` making ``F_new(y')`` the Frobenius-closest matrix to ``F_old(previous_y)``."""
    if old.blocks != new.blocks:
        raise ValueError("spaces have different block structures")
    if new.dim == 0:
        return np.zeros(0)
    w = _entry_weights(new)
    target = old.float_point(previous_y)
    A = (new.float_basis() * w).T
    rhs = (target - new.float_offset()) * w
    return np.linalg.lstsq(A, rhs, rcond=None)[0]


# -- SDPA sparse format ------------------------------------------------------------

def _fmt(x) -> str:
    return repr(float(x))


def export_sdpa(space: SdpSearchSpace) -> str:
    """Sparse SDPA (``.dat-s``) text for ``sum_i y_i F_i - F_0 >= 0``.

    ``F_0`` is the negated offset; entries are listed with ``i <= j``.
    """
    m = space.dim
    lines = [str(m), str(len(space.blocks)), " ".join(str(s) for s in space.blocks.sizes),
             " ".join("0.0" for _ in range(m))]

    def entries(matno, vec, negate=False):
        for k in sorted(vec):
            v = vec[k]
            if not v:
                continue
            b, i, j = space.entries[k]
            lines.append(f"{matno} {b + 1} {i + 1} {j + 1} {_fmt(-v if negate else v)}")

    entries(0, space.offset, negate=True)
    for idx, bv in enumerate(space.basis, start=1):
        entries(idx, bv)
    return "\n".join(lines) + "\n"


def write_sdpa(space: SdpSearchSpace, path) -> None:
    Path(path).write_text(export_sdpa(space))


def read_solution_vector(path, m: int) -> np.ndarray:
    """Whitespace-separated floats, one per ``y_i``."""
    text = Path(path).read_text()
    vals = np.array([float(tok) for tok in text.split()], dtype=float)
    if vals.shape != (m,):
        raise ValueError(f"{path}: expected {m} values, found {vals.size}")
    return vals


class SdpaFileSolver:
    """Writes the problem in SDPA format to ``path`` and reads ``y`` back
    from ``path + ".sol"``; whatever produces that file is up to the user."""

    def __init__(self, path):
        self.path = Path(path)

    @property
    def solution_path(self) -> Path:
        return self.path.with_name(self.path.name + ".sol")

    def __call__(self, space: SdpSearchSpace, fs: FloatSpace, warm_start=None,
                 tol: float = DEFAULT_TOL) -> NumericSolution:
        write_sdpa(space, self.path)
        if not self.solution_path.exists():
            raise FileNotFoundError(f"wrote {self.path}; no solution file {self.solution_path}")
        y = read_solution_vector(self.solution_path, space.dim)
        eigs = fs.min_eigenvalues(y)
        finite = [e for e in eigs if np.isfinite(e)]
        t = min(finite) if finite else 0.0
        return NumericSolution(y, t, eigs, 0, t >= -1e-6, [t])


def internal_solver(space: SdpSearchSpace, fs: FloatSpace, warm_start=None,
                    tol: float = DEFAULT_TOL) -> NumericSolution:
    return solve_feasibility(fs, warm_start, tol)
