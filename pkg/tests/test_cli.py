import subprocess
import sys
from pathlib import Path

import pytest

from ratsos.cli import EXIT_FAIL, EXIT_INPUT, EXIT_OK, main
from ratsos.problem import parse_problem
from ratsos.poly import ParseError

from . import oracles, tamper

FIXTURES = Path(__file__).parent / "fixtures"


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_parse_problem_examples():
    prob = parse_problem("vars y\nassume -2 + y^2 >= 0\n  assume\t1 - y^4 >= 0\ngoal unsat\n")
    assert prob.goal == "unsat" and len(prob.assumptions) == 2
    prob = parse_problem("vars x\ngoal nonneg x^2  # comment\n")
    assert prob.goal == "nonneg" and str(prob.target) == "x^2"


@pytest.mark.parametrize("text,msg", [
    ("assume x >= 0\ngoal unsat\n", "undeclared variable x"),
    ("vars x\nassume x >= 0\n", "goal"),
    ("vars x\ngoal unsat\n", "assume"),
    ("vars x\nassume x > 0\ngoal unsat\n", ""),
    ("vars x\ngoal nonneg 0\n", ""),
    ("vars x\nassume x >= 0\ngoal nonneg x^2\n", ""),
    ("vars x\ngoal maybe\n", ""),
])
def test_parse_problem_errors(text, msg):
    with pytest.raises(ParseError) as e:
        parse_problem(text)
    assert msg in str(e.value)


def test_run_quartic_and_check(tmp_path, capsys):
    out = tmp_path / "q.cert"
    assert main(["run", str(FIXTURES / "quartic_system.prob"), "-o", str(out), "-q"]) == EXIT_OK
    assert oracles.certificate_identity_residual(out.read_text()) == 0
    assert main(["check", str(out)]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "accepted"


def test_run_logs_dimension(tmp_path, caplog):
    caplog.set_level("INFO")
    main(["run", str(FIXTURES / "quartic_system.prob"), "-o", str(tmp_path / "c")])
    assert "search space dimension" in caplog.text


def test_run_to_stdout(capsys):
    assert main(["run", str(FIXTURES / "quartic_system.prob"), "-q"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("format ratsos-certificate 1\n")


def test_run_satisfiable_exits_1(tmp_path):
    p = write(tmp_path, "sat.prob", "vars x\nassume x >= 0\ngoal unsat\n")
    assert main(["run", str(p), "--max-degree", "4", "-q"]) == EXIT_FAIL


def test_run_malformed_exits_2(tmp_path):
    p = write(tmp_path, "bad.prob", "vars x\nassume x + >= 0\ngoal unsat\n")
    assert main(["run", str(p), "-q"]) == EXIT_INPUT
    assert main(["run", str(tmp_path / "missing.prob"), "-q"]) == EXIT_INPUT


def test_run_sdpa_file_solver_missing_solution(tmp_path):
    side = tmp_path / "side.dat-s"
    rc = main(["run", str(FIXTURES / "quartic_system.prob"), "--solver", f"sdpa-file:{side}", "-q"])
    assert rc == EXIT_INPUT and side.exists()


def test_bad_solver_flag():
    with pytest.raises(SystemExit) as e:
        main(["run", str(FIXTURES / "quartic_system.prob"), "--solver", "dsdp"])
    assert e.value.code == 2


def test_check_motzkin_fixture(capsys):
    assert main(["check", str(FIXTURES / "motzkin_quotient.cert")]) == EXIT_OK


def test_check_negated_coefficient(tmp_path, capsys, quartic_certificate_text):
    bad = write(tmp_path, "t.cert", tamper.mutate(quartic_certificate_text, tamper.negate_coefficient))
    assert main(["check", str(bad)]) == EXIT_FAIL
    assert "nonpositive square coefficient" in capsys.readouterr().out


def test_check_malformed_exits_2(tmp_path):
    p = write(tmp_path, "m.cert", "format ratsos-certificate 1\nvars y\ngoal unsat\nbogus\n")
    assert main(["check", str(p)]) == EXIT_INPUT
    assert main(["check", str(tmp_path / "none.cert")]) == EXIT_INPUT


def test_deterministic_output(tmp_path):
    a, b = tmp_path / "a.cert", tmp_path / "b.cert"
    prob = str(FIXTURES / "quartic_system.prob")
    assert main(["run", prob, "-o", str(a), "-q"]) == EXIT_OK
    assert main(["run", prob, "-o", str(b), "-q", "--seed", "7"]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_console_entry_point(tmp_path):
    out = tmp_path / "e.cert"
    r = subprocess.run([sys.executable, "-m", "ratsos.cli", "run",
                        str(FIXTURES / "quartic_system.prob"), "-o", str(out), "-q"],
                       capture_output=True, text=True, timeout=300)
    assert r.returncode == 0, r.stderr
    r = subprocess.run([sys.executable, "-m", "ratsos.cli", "check", str(out)],
                       capture_output=True, text=True, timeout=60)
    assert r.returncode == 0 and r.stdout.strip() == "accepted"
