"""Acceptance criteria 1-8.  Each test prints one ``CRITERION n: PASS|FAIL`` line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` or ``python3 tests/test_acceptance.py``.
"""
import random
import time
from fractions import Fraction
from pathlib import Path

import pytest
import sympy

from ratsos.certificate import parse_certificate, verify_witness
from ratsos.cli import EXIT_FAIL, EXIT_OK, main
from ratsos.linalg import QMatrix
from ratsos.lattice import lll_reduce
from ratsos.poly import parse_polynomial
from ratsos.problem import parse_problem
from ratsos.psd import gaussian_decompose, psd_check_charpoly
from ratsos.witness import SearchConfig, find_rational_psd_point, prove_nonneg_degree, prove_unsat

from . import oracles, tamper
from .fixtures import build
from .synthetic import degenerate_space
from .test_certificate import second_quartic_witness

FIXTURES = Path(__file__).parent / "fixtures"
MOTZKIN_VARS = ("x1", "x2", "x3")
MOTZKIN = parse_polynomial("x1^6 + x2^4*x3^2 + x2^2*x3^4 - 3*x1^2*x2^2*x3^2", MOTZKIN_VARS)

# pinned limits
C1_SECONDS, C1_DEGREE = 30, 4
C2_SECONDS = 10
C3_SECONDS = 300
C3_REFERENCE_DIMENSION = 186
C4_SPACES = 20
C5_SYMMETRIC, C5_GRAM = 200, 100
C6_LATTICES, C6_DELTA = 60, Fraction(99, 100)
C7_SECONDS = 600
C8_MUTATIONS = 10


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail=""):
        with capsys.disabled():
            print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'}" + (f"  ({detail})" if detail else ""))
    return emit


def test_criterion_1_quartic_refutation(tmp_path, report, capsys):
    cert = tmp_path / "quartic.cert"
    t0 = time.perf_counter()
    rc = main(["run", str(FIXTURES / "quartic_system.prob"), "-o", str(cert), "-q"])
    elapsed = time.perf_counter() - t0
    ok_run = rc == EXIT_OK
    w = parse_certificate(cert.read_text()) if ok_run else None
    degree = max(((p.polynomial * p.expanded(w.variables)).degree() for p in w.parts), default=0) if w else None
    ok_check = ok_run and main(["check", str(cert), "-q"]) == EXIT_OK
    ok_exact = ok_run and oracles.certificate_identity_residual(cert.read_text()) == 0
    ok_second = bool(verify_witness(second_quartic_witness()))
    ok = ok_run and ok_check and ok_exact and ok_second and degree <= C1_DEGREE and elapsed < C1_SECONDS
    report(1, ok, f"{elapsed:.2f}s, identity degree {degree}, check {'accepts' if ok_check else 'rejects'}, "
                  f"second reference witness {'accepted' if ok_second else 'rejected'}")
    assert ok


def test_criterion_2_motzkin_fixture(report):
    t0 = time.perf_counter()
    w = build.motzkin_quotient_witness()
    verdict = verify_witness(w)
    den, num = w.part("den"), w.part("num")
    identity = MOTZKIN * den.expanded(MOTZKIN_VARS) - num.expanded(MOTZKIN_VARS)
    residual = oracles.certificate_identity_residual((FIXTURES / "motzkin_quotient.cert").read_text())
    elapsed = time.perf_counter() - t0
    ok = bool(verdict) and identity.is_zero() and residual == 0 and elapsed < C2_SECONDS
    report(2, ok, f"M*Q1 - Q2 = 0 exactly, {len(den.basis)} + {len(num.basis)} basis monomials, {elapsed:.2f}s")
    assert ok


def _motzkin_attempt(d1):
    t0 = time.perf_counter()
    r = prove_nonneg_degree(MOTZKIN, d1)
    return r, time.perf_counter() - t0


@pytest.mark.slow
def test_criterion_3_motzkin_search(report, caplog):
    caplog.set_level("INFO", logger="ratsos")
    w36, t36 = _motzkin_attempt(3)
    dims = [int(m.split("dimension ")[1].split()[0].rstrip(",")) for m in caplog.messages
            if "search space: blocks" in m]
    f14, t14 = _motzkin_attempt(1)
    ok36 = bool(w36) and bool(verify_witness(w36)) and t36 < C3_SECONDS
    ok14 = not f14
    ok = ok36 and ok14
    report(3, ok, f"(3,6) {'verified' if ok36 else 'FAILED'} in {t36:.1f}s, initial dimension "
                  f"{dims[0] if dims else '?'} (reference {C3_REFERENCE_DIMENSION}, informational); "
                  f"(1,4) -> Failure({getattr(f14, 'reason', 'none')}); (2,5) see xfail below")
    assert ok


@pytest.mark.xfail(strict=True, reason="(2,5) quotient exists: the fixture forms divided by x3 "
                                       "verify exactly, and the search finds one")
def test_criterion_3_degree_2_5_must_fail(report):
    f25, t25 = _motzkin_attempt(2)
    report("3b", not f25, f"(2,5) must return Failure; got {'a verified witness' if f25 else 'Failure'} "
                          f"in {t25:.1f}s")
    assert not f25


def test_criterion_3_lower_degree_quotients_exist():
    """Exact witnesses of degree (2,5) and (1,4) exist, so must-fail is a numerical outcome at best."""
    assert verify_witness(build.motzkin_quotient_divided_witness())
    assert verify_witness(build.motzkin_14_witness())


@pytest.mark.slow
def test_criterion_4_degenerate_faces(report):
    found = naive_fail = 0
    t0 = time.perf_counter()
    for seed in range(C4_SPACES):
        sp, _ = degenerate_space(seed)
        pt = find_rational_psd_point(sp)
        if pt and all(gaussian_decompose(Q) for Q in pt.space.matrices(pt.y)):
            found += 1
        if not find_rational_psd_point(sp, SearchConfig(kernel_reduction=False)):
            naive_fail += 1
    ok = found == C4_SPACES and naive_fail >= C4_SPACES / 2
    report(4, ok, f"kernel reduction {found}/{C4_SPACES} verified, naive rounding fails "
                  f"{naive_fail}/{C4_SPACES}, {time.perf_counter() - t0:.1f}s")
    assert ok


def _rand_sym(rng, n):
    m = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            m[i][j] = m[j][i] = Fraction(rng.randint(-6, 6), rng.randint(1, 4))
    return m


def _rand_gram(rng, n):
    r = rng.randint(0, n)
    L = [[Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(n)] for _ in range(r)]
    return [[sum((L[k][i] * L[k][j] for k in range(r)), Fraction(0)) for j in range(n)] for i in range(n)]


def test_criterion_5_psd_oracles(report):
    rng = random.Random(2024)
    agree = 0
    for k in range(C5_SYMMETRIC):
        rows = _rand_gram(rng, rng.randint(1, 5)) if k % 3 == 0 else _rand_sym(rng, rng.randint(1, 5))
        Q = QMatrix.from_dense(rows)
        agree += bool(gaussian_decompose(Q)) == psd_check_charpoly(Q) == oracles.is_psd(rows)
    exact = 0
    for _ in range(C5_GRAM):
        n = rng.randint(1, 6)
        rows = _rand_gram(rng, n)
        dec = gaussian_decompose(QMatrix.from_dense(rows))
        exact += bool(dec) and [[Fraction(int(x.numerator), int(x.denominator)) for x in r]
                                for r in dec.gram(n)] == rows
    ok = agree == C5_SYMMETRIC and exact == C5_GRAM
    report(5, ok, f"agreement {agree}/{C5_SYMMETRIC}, exact round trip {exact}/{C5_GRAM}")
    assert ok


def _lll_conditions(b, delta):
    """Size reduction and Lovasz condition via an independent sympy Gram-Schmidt."""
    vecs = [sympy.Matrix(r) for r in b]
    star = sympy.GramSchmidt(vecs)
    n = len(b)
    mu = [[(vecs[i].dot(star[j]) / star[j].dot(star[j])) for j in range(n)] for i in range(n)]
    size = all(abs(mu[i][j]) <= sympy.Rational(1, 2) for i in range(n) for j in range(i))
    d = sympy.Rational(delta.numerator, delta.denominator)
    lovasz = all(star[k].dot(star[k]) >= (d - mu[k][k - 1] ** 2) * star[k - 1].dot(star[k - 1])
                 for k in range(1, n))
    return size, lovasz


def test_criterion_6_lll_quality(report):
    rng = random.Random(77)
    good = 0
    for _ in range(C6_LATTICES):
        n = rng.randint(2, 4)
        while True:
            b = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(n)]
            if oracles.sym_matrix(b).rank() == n:
                break
        red = lll_reduce(b, C6_DELTA)
        size, lovasz = _lll_conditions(red, C6_DELTA)
        lam2 = oracles.shortest_vector_norm2(b)
        b1 = sum(x * x for x in red[0])
        good += size and lovasz and b1 <= 2 ** (n - 1) * lam2 and oracles.same_lattice(b, red)
    ok = good == C6_LATTICES
    report(6, ok, f"{good}/{C6_LATTICES} lattices size-reduced, Lovasz (delta 0.99), "
                  f"|b1|^2 <= 2^(n-1) lambda1^2, same lattice")
    assert ok


def test_criterion_7_four_constraint_stretch(report):
    prob = parse_problem((FIXTURES / "four_constraints.prob").read_text())
    t0 = time.perf_counter()
    w = prove_unsat(prob.assumptions)
    elapsed = time.perf_counter() - t0
    ok = bool(w) and bool(verify_witness(w)) and elapsed < C7_SECONDS
    report(7, ok, f"non-gating stretch: {'verified' if ok else w} in {elapsed:.1f}s "
                  f"(reference: dimension 145, four rounds)")
    if not ok:
        pytest.xfail("known scaling limit; non-gating")


def test_criterion_8_tamper_suite(tmp_path, report, capsys, quartic_certificate_text):
    assert main(["check", str(_write(tmp_path, "orig.cert", quartic_certificate_text)), "-q"]) == EXIT_OK
    capsys.readouterr()
    rows = []
    for i, (name, fn, expected) in enumerate(tamper.MUTATIONS):
        path = _write(tmp_path, f"m{i}.cert", tamper.mutate(quartic_certificate_text, fn))
        rc = main(["check", str(path), "-q"])
        out = capsys.readouterr().out
        rows.append((name, rc == EXIT_FAIL and tamper.reason_matches(out, expected), out.strip()))
    rejected = sum(ok for _, ok, _ in rows)
    ok = rejected == len(rows) and len(rows) >= C8_MUTATIONS
    report(8, ok, f"{rejected}/{len(rows)} mutations rejected with the expected reason")
    assert ok, [r for r in rows if not r[1]]


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
