from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def quartic_certificate_text():
    """Certificate produced by a search on the two-constraint quartic system."""
    from ratsos.certificate import format_certificate
    from ratsos.problem import parse_problem
    from ratsos.witness import prove_unsat

    prob = parse_problem((FIXTURES / "quartic_system.prob").read_text())
    w = prove_unsat(prob.assumptions)
    assert w, w
    return format_certificate(w)
