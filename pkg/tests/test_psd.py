import random
from fractions import Fraction

import numpy as np
import pytest

from ratsos.linalg import QMatrix
from ratsos.poly import parse_polynomial
from ratsos.psd import (NotPsd, cholesky_ok, gaussian_decompose, psd_check_charpoly,
                        psd_precheck_numeric)
from ratsos.sos import SosDecomposition, expand_sos

from . import oracles


def Q(rows):
    return QMatrix.from_dense(rows)


def gram(dec, n):
    return [[Fraction(int(x.numerator), int(x.denominator)) for x in r] for r in dec.gram(n)]


def test_decompose_2x2():
    dec = gaussian_decompose(Q([[2, 1], [1, 2]]))
    assert dec and len(dec) == 2
    (c1, v1), (c2, v2) = dec.terms
    assert (c1, list(v1)) == (2, [1, Fraction(1, 2)])
    assert (c2, list(v2)) == (Fraction(3, 2), [0, 1])


def test_decompose_singular():
    dec = gaussian_decompose(Q([[1, 1], [1, 1]]))
    assert dec and len(dec) == 1 and gram(dec, 2) == [[1, 1], [1, 1]]


def test_decompose_indefinite():
    res = gaussian_decompose(Q([[1, 2], [2, 1]]))
    assert isinstance(res, NotPsd) and not res
    u = res.vector
    m = Q([[1, 2], [2, 1]])
    assert sum(a * b for a, b in zip(u, m.apply(u))) < 0


def test_decompose_zero_pivot_nonzero_row():
    res = gaussian_decompose(Q([[0, 1], [1, 0]]))
    assert not res and res.reason == "zero pivot with nonzero row"
    assert res.value < 0


def test_decompose_zero_matrix():
    dec = gaussian_decompose(QMatrix.zeros(3, 3))
    assert isinstance(dec, SosDecomposition) and len(dec) == 0


def test_non_symmetric_rejected():
    with pytest.raises(ValueError):
        gaussian_decompose(Q([[1, 2], [0, 1]]))
    with pytest.raises(ValueError):
        psd_check_charpoly(Q([[1, 2], [0, 1]]))


def random_psd(rng, n):
    r = rng.randint(0, n)
    L = [[Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(n)] for _ in range(r)]
    return [[sum((L[k][i] * L[k][j] for k in range(r)), Fraction(0)) for j in range(n)]
            for i in range(n)]


def random_sym(rng, n):
    m = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            m[i][j] = m[j][i] = Fraction(rng.randint(-5, 5), rng.randint(1, 3))
    return m


@pytest.mark.parametrize("seed", range(100))
def test_roundtrip_random_psd(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 6)
    rows = random_psd(rng, n)
    dec = gaussian_decompose(Q(rows))
    assert dec
    assert gram(dec, n) == rows
    assert all(c > 0 for c, _ in dec)


def test_agreement_with_charpoly_and_sympy():
    rng = random.Random(12345)
    disagree = 0
    for k in range(200):
        n = rng.randint(1, 5)
        rows = random_psd(rng, n) if k % 2 else random_sym(rng, n)
        m = Q(rows)
        g = bool(gaussian_decompose(m))
        disagree += not (g == psd_check_charpoly(m) == oracles.is_psd(rows))
    assert disagree == 0


@pytest.mark.parametrize("seed", range(30))
def test_not_psd_vector_is_valid(seed):
    rng = random.Random(900 + seed)
    n = rng.randint(2, 5)
    rows = random_sym(rng, n)
    res = gaussian_decompose(Q(rows))
    if res:
        return
    u = [Fraction(int(x.numerator), int(x.denominator)) for x in res.vector]
    val = sum(u[i] * rows[i][j] * u[j] for i in range(n) for j in range(n))
    assert val < 0 and val == res.value


def test_expand_matches_gram():
    vs = ("x", "y")
    basis = [(1, 0), (0, 1)]
    dec = gaussian_decompose(Q([[2, 1], [1, 2]]))
    assert expand_sos(dec, basis, vs) == parse_polynomial("2*x^2 + 2*x*y + 2*y^2", vs)


def test_decomposition_length_mismatch():
    dec = SosDecomposition([(1, [1, 2])])
    with pytest.raises(ValueError):
        dec.gram(3)
    with pytest.raises(ValueError):
        expand_sos(dec, [(1,)], ("x",))


def test_precheck_examples():
    assert psd_precheck_numeric(QMatrix.identity(3))
    assert not psd_precheck_numeric(Q([[1, 1], [1, 1]]))
    assert psd_precheck_numeric(Q([[1, 1], [1, 1]]), Q([[1, 0]]))
    assert not psd_precheck_numeric(Q([[1, 2], [2, 1]]))
    assert cholesky_ok(np.zeros((0, 0)))
