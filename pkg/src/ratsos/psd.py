"""Exact positive-semidefiniteness checks for rational symmetric matrices.

:func:`gaussian_decompose` is the authoritative check and doubles as the
SOS extractor.  :func:`psd_check_charpoly` is an independent exact
cross-check; :func:`psd_precheck_numeric` is a fast float screen.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from gmpy2 import mpq

from .linalg import QMatrix, charpoly
from .sos import SosDecomposition

CHOLESKY_RTOL = 1e-10


@dataclass
class NotPsd:
    """Falsy outcome of :func:`gaussian_decompose`.

    ``vector`` is a rational ``u`` with ``u^T Q u = value < 0``.
    """

    index: int
    reason: str
    vector: list[mpq] = field(default_factory=list)
    value: mpq = mpq(0)

    def __bool__(self) -> bool:
        return False


def gaussian_decompose(Q: QMatrix) -> SosDecomposition | NotPsd:
    """Gaussian reduction ``Q = sum c_i v_i^T v_i`` with ``c_i > 0``.

    Pivots are taken along the diagonal in order.  A negative pivot, or a
    zero pivot whose row is not zero, proves ``Q`` is not PSD; the returned
    :class:`NotPsd` carries a verified vector with negative quadratic form.
    """
    if not Q.is_symmetric():
        raise ValueError("matrix is not symmetric")
    n = Q.nrows
    m = [dict(r) for r in Q.rows]
    out: list[tuple[mpq, list[mpq]]] = []
    done: list[tuple[int, dict]] = []  # (pivot index, v as sparse dict)
    for i in range(n):
        d = m[i].get(i, mpq(0))
        if d < 0:
            u = _witness(done, n, {i: mpq(1)})
            return _not_psd(Q, i, "negative pivot", u)
        if d == 0:
            if m[i]:
                j = min(m[i])
                b = m[i][j]
                dj = m[j].get(j, mpq(0))
                # (s e_i + e_j)^T m (s e_i + e_j) = 2 s b + dj = -1
                s = -(dj + 1) / (2 * b)
                u = _witness(done, n, {i: s, j: mpq(1)})
                return _not_psd(Q, i, "zero pivot with nonzero row", u)
            continue
        row = m[i]
        v = {j: x / d for j, x in row.items()}
        out.append((d, [v.get(j, mpq(0)) for j in range(n)]))
        done.append((i, v))
        # m -= d v^T v, touching only the support of v
        for a, va in v.items():
            ra = m[a]
            f = d * va
            for b, vb in v.items():
                nv = ra.get(b, 0) - f * vb
                if nv:
                    ra[b] = nv
                else:
                    ra.pop(b, None)
    return SosDecomposition(out)


def _witness(done, n, tail: dict) -> list[mpq]:
    """Extend ``tail`` so that ``<u, v_k> = 0`` for every eliminated ``v_k``."""
    u = [mpq(0)] * n
    for j, x in tail.items():
        u[j] = x
    for p, v in reversed(done):
        # v[p] == 1 and v vanishes below p
        s = sum((x * u[j] for j, x in v.items() if j != p), mpq(0))
        u[p] = -s
    return u


def _not_psd(Q: QMatrix, i: int, reason: str, u: list[mpq]) -> NotPsd:
    Qu = Q.apply(u)
    value = sum((a * b for a, b in zip(u, Qu)), mpq(0))
    if value >= 0:  # pragma: no cover - would be a bug in the elimination
        raise AssertionError(f"non-PSD witness check failed at pivot {i}")
    return NotPsd(i, reason, u, value)


def sign_variations(coeffs) -> int:
    signs = [c > 0 for c in coeffs if c != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def psd_check_charpoly(Q: QMatrix) -> bool:
    """PSD iff ``charpoly(Q)(-lam)`` has no sign variation (Descartes' rule,
    exact here because a symmetric matrix has only real eigenvalues)."""
    if not Q.is_symmetric():
        raise ValueError("matrix is not symmetric")
    p = charpoly(Q)
    n = Q.nrows
    coeffs = [p.coefficient((k,)) * (-1) ** k for k in range(n + 1)]
    return sign_variations(coeffs) == 0


def psd_precheck_numeric(Q: QMatrix, B: QMatrix | None = None,
                         rtol: float = CHOLESKY_RTOL) -> bool:
    """Float Cholesky of ``B Q B^T``; advisory only.

    Fails when a pivot drops to ``rtol * max diagonal`` or below, so a PSD
    ``Q`` with a kernel not removed by ``B`` reads as False.
    """
    A = Q.to_float()
    if B is not None:
        Bf = B.to_float()
        A = Bf @ A @ Bf.T
    return cholesky_ok(A, rtol)


def cholesky_ok(A: np.ndarray, rtol: float = CHOLESKY_RTOL) -> bool:
    n = A.shape[0]
    if n == 0:
        return True
    A = np.array((A + A.T) / 2, dtype=float)
    tol = rtol * max(float(np.max(np.abs(np.diag(A)))), 0.0)
    for k in range(n):
        d = A[k, k]
        if not d > tol:
            return False
        col = A[k + 1:, k] / d
        A[k + 1:, k + 1:] -= np.outer(col, A[k, k + 1:])
    return True
