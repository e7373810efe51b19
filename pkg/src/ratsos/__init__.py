"""Exact rational sums-of-squares witnesses for polynomial nonnegativity and
for infeasibility of polynomial inequality systems."""
from .certificate import (PsatzWitness, Verdict, WitnessPart, format_certificate,
                          parse_certificate, read_certificate, verify_witness,
                          write_certificate)
from .linalg import AffineSpace, Infeasible, QMatrix, rref, row_span_basis, solve_affine
from .poly import ParseError, Polynomial, newton_halved_monomials, parse_polynomial
from .psd import NotPsd, gaussian_decompose, psd_check_charpoly, psd_precheck_numeric
from .sos import SosDecomposition, expand_sos
from .witness import (Failure, SearchConfig, find_rational_psd_point, prove_nonneg,
                      prove_nonneg_degree, prove_unsat, round_to_rational)

__version__ = "0.1.0"

__all__ = [
    "AffineSpace", "Failure", "Infeasible", "NotPsd", "ParseError", "Polynomial",
    "PsatzWitness", "QMatrix", "SearchConfig", "SosDecomposition", "Verdict", "WitnessPart",
    "expand_sos", "find_rational_psd_point", "format_certificate", "gaussian_decompose",
    "newton_halved_monomials", "parse_certificate", "parse_polynomial", "prove_nonneg",
    "prove_nonneg_degree", "prove_unsat", "psd_check_charpoly", "psd_precheck_numeric",
    "read_certificate", "round_to_rational", "row_span_basis", "rref", "solve_affine",
    "verify_witness", "write_certificate",
]
