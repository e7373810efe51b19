"""Proof search: the rational-point loop on degenerate SDP search spaces and
the nonnegativity / refutation front ends built on it."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from gmpy2 import mpq

from .certificate import NONNEG, UNSAT, PsatzWitness, WitnessPart, verify_witness
from .lattice import ALPHA0, BETA, GAMMA, find_kernel_vectors, simplify_solution
from .linalg import Infeasible
from .poly import Polynomial, to_rational, variables_check
from .psd import gaussian_decompose, psd_precheck_numeric
from .reduce import (SdpSearchSpace, SosProblem, build_search_space, restrict_search_space,
                     select_bases)
from .sdp import (DEFAULT_TOL, NonConvergence, compress, compression_bases, internal_solver,
                  warm_start_projection)
from .sos import SosDecomposition

log = logging.getLogger(__name__)

ROUNDING_BOUNDS = (10 ** 6, 2 * 10 ** 6, 4 * 10 ** 6)
DEFAULT_MAX_DEGREE = 12


@dataclass
class SearchConfig:
    max_degree: int = DEFAULT_MAX_DEGREE
    use_products: bool = False
    solver: Callable = internal_solver
    alpha0: float = ALPHA0
    beta: float = BETA
    gamma: float = GAMMA
    tol: float = DEFAULT_TOL
    simplify: bool = False
    rounding_bounds: tuple[int, ...] = ROUNDING_BOUNDS
    extra_iterations: int = 5
    kernel_reduction: bool = True


class Failure:
    """Falsy outcome of a search; ``reason`` names the exit that fired."""

    def __init__(self, reason: str, detail: str = "", history=None):
        self.reason = reason
        self.detail = detail
        self.history = list(history or [])

    def __bool__(self) -> bool:
        return False

    def __str__(self) -> str:
        return f"{self.reason}: {self.detail}" if self.detail else self.reason

    def __repr__(self) -> str:
        return f"Failure({self.reason!r}, {self.detail!r})"


@dataclass
class RationalPoint:
    y: list[mpq]
    space: SdpSearchSpace
    decompositions: list[SosDecomposition]
    rounds: int
    dimensions: list[int] = field(default_factory=list)


def round_to_rational(y_float: Sequence[float], bound: int) -> list[mpq]:
    """Best rational approximation of each coordinate with denominator <= bound."""
    if bound < 1:
        raise ValueError("denominator bound must be at least 1")
    return [to_rational(Fraction(float(x)).limit_denominator(bound)) for x in y_float]


def exact_block_checks(space: SdpSearchSpace, y, B=None) -> list:
    """Per block: SosDecomposition or NotPsd, exact.  The float pre-check is
    only logged; every verdict comes from Gaussian reduction."""
    out = []
    for b, Q in enumerate(space.matrices(y)):
        if B is not None and B[b].nrows and not psd_precheck_numeric(Q, B[b]):
            log.debug("block %d: numeric pre-check fails", b)
        out.append(gaussian_decompose(Q))
    return out


def find_rational_psd_point(space: SdpSearchSpace, config: SearchConfig | None = None
                            ) -> RationalPoint | Failure:
    """Rational ``y`` with every block of ``F(y)`` exactly PSD.

    Each round solves the compressed problem numerically, rounds, and
    checks exactly; blocks that fail donate kernel vectors found by
    lattice reduction, which restrict the space before the next round.
    """
    config = config or SearchConfig()
    cap = space.dim + config.extra_iterations
    warm = None
    dims = [space.dim]
    for rnd in range(1, cap + 1):
        B = compression_bases(space)
        if space.dim == 0 or all(b.nrows == 0 for b in B):
            y = [mpq(0)] * space.dim
            checks = exact_block_checks(space, y)
            if all(checks):
                return RationalPoint(y, space, checks, rnd, dims)
            return Failure("no solution", "the only candidate matrix is not PSD", dims)
        fs = compress(space, B)
        try:
            sol = config.solver(space, fs, warm, config.tol)
        except NonConvergence as e:
            return Failure("solver did not converge", str(e), dims)
        eig_text = ", ".join(f"{e:.3g}" for e in sol.min_eigs)
        log.info("round %d: search space dimension %d, blocks %s, t = %.3e, min eigenvalues [%s]",
                 rnd, space.dim, fs.sizes, sol.t, eig_text)
        if not sol.feasible:
            return Failure("no solution", f"numeric optimum t = {sol.t:.3e} < 0", dims)
        checks = None
        for bound in config.rounding_bounds:
            y = round_to_rational(sol.y, bound)
            checks = exact_block_checks(space, y, B)
            if all(checks):
                log.info("round %d: exact PSD check passed (denominator bound %d)", rnd, bound)
                point = RationalPoint(y, space, checks, rnd, dims)
                if config.simplify:
                    point = _simplified(point, sol.y) or point
                return point
        failing = [b for b, c in enumerate(checks) if not c]
        log.info("round %d: blocks %s fail the exact check", rnd, failing)
        if not config.kernel_reduction:
            return Failure("rounding failed", f"blocks {failing} not PSD after rounding", dims)
        pairs = []
        for b in failing:
            if B[b].nrows == 0:
                continue
            kc = find_kernel_vectors(fs.block(sol.y, b), B[b], config.alpha0,
                                     config.beta, config.gamma)
            log.debug("block %d: %d kernel candidate(s)", b, len(kc))
            pairs.extend((b, v) for v in kc.vectors)
        new = restrict_search_space(space, pairs)
        if isinstance(new, Infeasible):
            return Failure("restriction infeasible",
                           "no solution, or a bad kernel vector was chosen", dims)
        if new.dim >= space.dim:
            return Failure("dimension stalled", f"dimension stays at {space.dim}", dims)
        warm = warm_start_projection(sol.y, space, new)
        space = new
        dims.append(space.dim)
    return Failure("iteration cap", f"{cap} rounds", dims)


def _simplified(point: RationalPoint, y_float) -> RationalPoint | None:
    space = point.space
    v = space.float_point(y_float)
    f0 = [space.offset.get(k, mpq(0)) for k in range(space.nentries)]
    fs = [[bv.get(k, mpq(0)) for k in range(space.nentries)] for bv in space.basis]
    found = {}

    def accept(y):
        checks = exact_block_checks(space, y)
        if all(checks):
            found["checks"] = checks
            return True
        return False

    y = simplify_solution(v, f0, fs, accept)
    if not y:
        log.info("coefficient simplification: %s", y.reason)
        return None
    log.info("coefficient simplification accepted")
    return RationalPoint(y, space, found["checks"], point.rounds, point.dimensions)


# -- front ends ---------------------------------------------------------------------

def _solve_problem(problem: SosProblem, config: SearchConfig) -> RationalPoint | Failure:
    space = build_search_space(problem)
    if isinstance(space, Infeasible):
        return Failure("no symmetric solution", space.reason)
    log.info("search space: blocks %s, %d constraints, dimension %d",
             list(space.blocks.sizes), space.n_constraints, space.dim)
    return find_rational_psd_point(space, config)


def _gated(w: PsatzWitness) -> PsatzWitness:
    verdict = verify_witness(w)
    if not verdict:
        raise RuntimeError(f"internal error: produced witness fails verification ({verdict.reason})")
    return w


def nonneg_problem(P: Polynomial, d1: int, homogeneous: bool | None = None) -> SosProblem | None:
    """``P*Q1 - Q2 = 0`` with ``Q1`` over monomials of degree ``d1`` (at most,
    or exactly when homogeneous) and unit trace on ``Q1``."""
    if homogeneous is None:
        homogeneous = P.is_homogeneous()
    one = Polynomial.constant(1, P.vars)
    mults = [P, -one]
    bases = select_bases(mults, Polynomial({}, P.vars), 2 * d1 + P.degree(), homogeneous)
    if not all(bases):
        return None
    return SosProblem([("den", P), ("num", -one)], Polynomial({}, P.vars), bases, unit_trace=(0,))


def _nonneg_witness(P: Polynomial, point: RationalPoint) -> PsatzWitness:
    parts = [WitnessPart(lab, poly, basis, dec) for lab, poly, basis, dec in
             zip(point.space.labels, [P, Polynomial.constant(-1, P.vars)],
                 point.space.bases, point.decompositions)]
    return PsatzWitness(NONNEG, P.vars, parts, goal=P)


def prove_nonneg_sos(P: Polynomial, config: SearchConfig | None = None) -> PsatzWitness | Failure:
    """Plain SOS attempt: ``Q1 = 1``, ``Q2 = P``."""
    config = config or SearchConfig()
    one = Polynomial.constant(1, P.vars)
    bases = select_bases([one], P, P.degree())
    if not bases[0]:
        return Failure("no symmetric solution", "empty Newton basis")
    point = _solve_problem(SosProblem([("sos", one)], P, bases), config)
    if not point:
        return point
    parts = [WitnessPart("den", P, [tuple([0] * P.nvars)], SosDecomposition([(1, [1])])),
             WitnessPart("num", -one, bases[0], point.decompositions[0])]
    return _gated(PsatzWitness(NONNEG, P.vars, parts, goal=P))


def prove_nonneg_degree(P: Polynomial, d1: int, config: SearchConfig | None = None,
                        homogeneous: bool | None = None) -> PsatzWitness | Failure:
    """Quotient attempt with denominator basis degree ``d1``."""
    config = config or SearchConfig()
    problem = nonneg_problem(P, d1, homogeneous)
    if problem is None:
        return Failure("no symmetric solution", f"empty basis at d1 = {d1}")
    log.info("nonneg: quotient basis degrees %d and %d, block sizes %s",
             d1, d1 + P.degree() // 2, [len(b) for b in problem.bases])
    point = _solve_problem(problem, config)
    if not point:
        return point
    return _gated(_nonneg_witness(P, point))


def prove_nonneg(P: Polynomial, config: SearchConfig | None = None) -> PsatzWitness | Failure:
    """Plain SOS first, then quotients ``Q2/Q1`` with growing ``deg Q1``
    while ``2*d1 + deg P`` stays within ``config.max_degree``."""
    config = config or SearchConfig()
    if P.is_zero():
        raise ValueError("P must be nonzero")
    attempts = []
    w = prove_nonneg_sos(P, config)
    if w:
        return w
    attempts.append(f"sos: {w}")
    d1 = 1
    while 2 * d1 + P.degree() <= config.max_degree:
        w = prove_nonneg_degree(P, d1, config)
        if w:
            return w
        attempts.append(f"d1={d1}: {w}")
        d1 += 1
    return Failure("bound exhausted", "; ".join(attempts))


def product_labels(n: int, max_size: int) -> list[tuple[int, ...]]:
    """Square-free index subsets by size, then lexicographically."""
    out = []
    for k in range(1, max_size + 1):
        out.extend(itertools.combinations(range(n), k))
    return out


def unsat_problem(constraints: Sequence[Polynomial], degree_bound: int,
                  max_product: int = 1) -> SosProblem:
    variables = variables_check(constraints)
    one = Polynomial.constant(1, variables)
    mults = []
    for subset in product_labels(len(constraints), max_product):
        p = one
        for i in subset:
            p = p * constraints[i]
        mults.append(("*".join(f"P{i + 1}" for i in subset), p))
    mults.append(("const", one))
    bases = select_bases([p for _, p in mults], -one, degree_bound)
    keep = [(m, b) for m, b in zip(mults, bases) if b]
    return SosProblem([m for m, _ in keep], -one, [b for _, b in keep])


def _unsat_witness(constraints, point: RationalPoint, problem: SosProblem) -> PsatzWitness:
    parts = [WitnessPart(lab, poly, basis, dec) for (lab, poly), basis, dec in
             zip(problem.multiplicands, point.space.bases, point.decompositions)]
    return PsatzWitness(UNSAT, problem.variables, parts, assumptions=list(constraints))


def default_degree_bound(polys: Sequence[Polynomial]) -> int:
    d = max(p.degree() for p in polys)
    return d + d % 2


def prove_unsat(constraints: Sequence[Polynomial], config: SearchConfig | None = None
                ) -> PsatzWitness | Failure:
    """Refute ``P_i >= 0`` for all i by ``sum_j Q_j P_j + Q_0 = -1``.

    Degree bounds start at the largest constraint degree rounded up to
    even and grow by 2 up to ``config.max_degree``; with ``use_products``
    each bound also tries square-free products of growing size.
    """
    config = config or SearchConfig()
    constraints = list(constraints)
    if not constraints:
        raise ValueError("at least one constraint is required")
    variables_check(constraints)
    attempts = []
    levels = len(constraints) if config.use_products else 1
    bound = default_degree_bound(constraints)
    while bound <= max(config.max_degree, default_degree_bound(constraints)):
        for level in range(1, levels + 1):
            problem = unsat_problem(constraints, bound, level)
            log.info("unsat: degree bound %d, products up to size %d, multiplicands %s",
                     bound, level, [m for m, _ in problem.multiplicands])
            point = _solve_problem(problem, config)
            if point:
                return _gated(_unsat_witness(constraints, point, problem))
            attempts.append(f"bound {bound}/products {level}: {point}")
        bound += 2
    return Failure("bound exhausted", "; ".join(attempts))
