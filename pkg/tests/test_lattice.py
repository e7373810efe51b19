import random
from fractions import Fraction

import numpy as np
import pytest

from ratsos.lattice import (NoImprovement, find_kernel_vectors, is_lll_reduced, lift, lll_reduce,
                            round_half_away, simplify_solution)
from ratsos.linalg import QMatrix

from . import oracles


def norm2(v):
    return sum(x * x for x in v)


def test_identity_is_reduced():
    I3 = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert lll_reduce(I3) == I3


def test_three_dim_example():
    basis = [[1, 1, 1], [-1, 0, 2], [3, 5, 6]]
    red = lll_reduce(basis)
    assert oracles.shortest_vector_norm2(basis, 5) == 1
    assert min(norm2(v) for v in red) == 1
    assert oracles.same_lattice(basis, red) and is_lll_reduced(red)


def test_two_dim_example():
    red = lll_reduce([[2, 0], [1, 1]])
    assert sorted(norm2(v) for v in red) == [2, 2]


def test_dependent_rows_rejected():
    with pytest.raises(ValueError):
        lll_reduce([[1, 2], [2, 4]])
    with pytest.raises(ValueError):
        lll_reduce([[1, 0]], delta=Fraction(1, 5))


def test_round_half_away():
    assert [round_half_away(x) for x in (2.5, -2.5, 0.49, -0.5, Fraction(7, 2))] == [3, -3, 0, -1, 4]


@pytest.mark.parametrize("seed", range(12))
def test_lll_same_lattice_random(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 5)
    while True:
        b = [[rng.randint(-30, 30) for _ in range(n)] for _ in range(n)]
        if oracles.sym_matrix(b).rank() == n:
            break
    red = lll_reduce(b)
    assert oracles.same_lattice(b, red)
    assert is_lll_reduced(red)


def test_lll_rectangular():
    b = [[1, 0, 0, 1000], [0, 1, 0, 999], [0, 0, 1, 1]]
    red = lll_reduce(b)
    assert is_lll_reduced(red) and oracles.same_lattice(b, red)


def test_kernel_vector_small_eigenvalue():
    G = np.diag([1e-12, 1.0])
    kc = find_kernel_vectors(G, QMatrix.identity(2))
    assert kc.ws[0] == [1, 0] and list(kc.vectors[0]) == [1, 0]


def test_kernel_vector_well_conditioned_still_returns_candidates():
    kc = find_kernel_vectors(np.eye(3), QMatrix.identity(3))
    assert len(kc) >= 1


def test_kernel_empty_block():
    assert len(find_kernel_vectors(np.zeros((0, 0)), QMatrix.zeros(0, 4))) == 0


def test_kernel_vectors_lift_exactly():
    B = QMatrix.from_dense([[1, 0, Fraction(1, 2)], [0, 1, 3]])
    G = np.array([[2.0, -1.0], [-1.0, 0.5]])  # kernel (1, 2)
    kc = find_kernel_vectors(G, B)
    for w, v in zip(kc.ws, kc.vectors):
        assert list(v) == lift(w, B)
    assert any(w in ([1, 2], [-1, -2]) for w in kc.ws)


@pytest.mark.parametrize("seed", range(6))
def test_kernel_found_on_synthetic(seed):
    rng = np.random.default_rng(seed)
    k = 6
    w_true = rng.integers(-3, 4, size=k)
    while not w_true.any():
        w_true = rng.integers(-3, 4, size=k)
    P = np.eye(k) - np.outer(w_true, w_true) / (w_true @ w_true)
    A = rng.normal(size=(k, k))
    G = P @ (A @ A.T + np.eye(k)) @ P + 1e-12 * rng.normal(size=(k, k))
    kc = find_kernel_vectors(G, QMatrix.identity(k))
    assert any(list(w) in (w_true.tolist(), (-w_true).tolist())
               or np.allclose(np.array(w) * (w_true @ w_true) / (np.array(w) @ w_true), w_true)
               for w in kc.ws)


def test_simplify_third():
    y = simplify_solution([0.333333333], [0], [[1]])
    assert y and y[0] == Fraction(1, 3)
    assert abs(float(y[0]) - 0.333333333) < 1e-9


def test_simplify_exact_offset():
    y = simplify_solution([0.5, 0.25], ["1/2", "1/4"], [[1, 0], [0, 1]])
    assert y and list(y) == [0, 0]


def test_simplify_exhausted():
    res = simplify_solution([0.5], [0], [[1]], accept=lambda y: False)
    assert isinstance(res, NoImprovement) and not res


def test_simplify_sanity_bound():
    v = [0.1428571428571, 0.2857142857143]
    f0 = [0, 0]
    fs = [[1, 2]]

    def accept(y):
        return True

    y = simplify_solution(v, f0, fs, accept)
    assert y == [Fraction(1, 7)]
    point = [float(y[0]) * f for f in fs[0]]
    assert max(abs(a - b) for a, b in zip(point, v)) <= 10 / 2 ** 8
