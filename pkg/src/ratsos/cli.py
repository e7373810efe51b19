"""``ratsos run`` searches for a witness; ``ratsos check`` verifies a certificate.

Exit status: 0 witness found / certificate accepted, 1 search exhausted /
certificate rejected, 2 input error.
"""
from __future__ import annotations

import argparse
import logging
import random
import sys
from fractions import Fraction
from pathlib import Path

from .certificate import (CertificateSyntaxError, PsatzWitness, format_certificate,
                          parse_certificate, verify_witness)
from .poly import ParseError

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

log = logging.getLogger("ratsos")


def _solver_arg(text: str):
    if text == "internal":
        return text
    if text.startswith("sdpa-file:") and len(text) > len("sdpa-file:"):
        return text
    raise argparse.ArgumentTypeError("expected 'internal' or 'sdpa-file:<path>'")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ratsos", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="search for a witness and write a certificate")
    run.add_argument("problem", type=Path)
    run.add_argument("-o", "--output", type=Path, help="certificate path (default: stdout)")
    run.add_argument("--max-degree", type=int, default=None,
                     help="largest degree of the witness identity (default 12)")
    run.add_argument("--use-products", action="store_true",
                     help="also use square-free products of assumptions")
    run.add_argument("--solver", type=_solver_arg, default="internal",
                     help="internal (default) or sdpa-file:<path>")
    run.add_argument("--simplify", action="store_true", help="LLL coefficient simplification pass")
    run.add_argument("--alpha0", type=float, default=None)
    run.add_argument("--beta", type=float, default=None)
    run.add_argument("--gamma", type=float, default=None)
    run.add_argument("--seed", type=int, default=0,
                     help="seed for the random-point spot check of the identity")
    run.add_argument("-q", "--quiet", action="store_true")

    check = sub.add_parser("check", help="verify a certificate")
    check.add_argument("certificate", type=Path)
    check.add_argument("-q", "--quiet", action="store_true")
    return ap


def _config(args):
    from .sdp import SdpaFileSolver, internal_solver
    from .witness import SearchConfig

    cfg = SearchConfig()
    if args.max_degree is not None:
        cfg.max_degree = args.max_degree
    cfg.use_products = args.use_products
    cfg.simplify = args.simplify
    for name in ("alpha0", "beta", "gamma"):
        if getattr(args, name) is not None:
            setattr(cfg, name, getattr(args, name))
    if args.solver == "internal":
        cfg.solver = internal_solver
    else:
        cfg.solver = SdpaFileSolver(args.solver[len("sdpa-file:"):])
    return cfg


def spot_check(w: PsatzWitness, seed: int, points: int = 5) -> bool:
    """Evaluate the identity at random rational points (a redundant check)."""
    rng = random.Random(seed)
    for _ in range(points):
        pt = [Fraction(rng.randint(-20, 20), rng.randint(1, 7)) for _ in w.variables]
        total = sum((p.polynomial.evaluate(pt) * p.expanded(w.variables).evaluate(pt)
                     for p in w.parts), 0)
        if w.kind == "unsat":
            total += 1
        if total != 0:
            return False
    return True


def cmd_run(args) -> int:
    from .problem import parse_problem
    from .witness import prove_nonneg, prove_unsat

    try:
        text = args.problem.read_text(encoding="utf-8")
        problem = parse_problem(text)
    except OSError as e:
        print(f"ratsos: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ParseError as e:
        print(f"ratsos: {args.problem}: {e}", file=sys.stderr)
        return EXIT_INPUT
    cfg = _config(args)
    try:
        if problem.goal == "unsat":
            result = prove_unsat(problem.assumptions, cfg)
        else:
            result = prove_nonneg(problem.target, cfg)
    except FileNotFoundError as e:
        print(f"ratsos: {e}", file=sys.stderr)
        return EXIT_INPUT
    if not result:
        print(f"ratsos: no witness found ({result})", file=sys.stderr)
        return EXIT_FAIL
    if not spot_check(result, args.seed):  # pragma: no cover - exact check already passed
        print("ratsos: internal error: spot check failed", file=sys.stderr)
        return EXIT_FAIL
    cert = format_certificate(result)
    if args.output is None:
        sys.stdout.write(cert)
    else:
        args.output.write_text(cert, encoding="utf-8")
        log.info("certificate written to %s", args.output)
    return EXIT_OK


def cmd_check(args) -> int:
    try:
        w = parse_certificate(args.certificate.read_text(encoding="utf-8"))
    except OSError as e:
        print(f"ratsos: {e}", file=sys.stderr)
        return EXIT_INPUT
    except CertificateSyntaxError as e:
        print(f"ratsos: {args.certificate}: {e}", file=sys.stderr)
        return EXIT_INPUT
    verdict = verify_witness(w)
    if verdict:
        if not args.quiet:
            print("accepted")
        return EXIT_OK
    print(f"rejected: {verdict.reason}")
    return EXIT_FAIL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(message)s", stream=sys.stderr)
    if args.command == "run":
        return cmd_run(args)
    return cmd_check(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
