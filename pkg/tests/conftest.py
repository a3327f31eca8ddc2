import numpy as np
import pytest

from dhgauge import evolution

_ACCEPTANCE_LINES = []


def record_criterion(name, passed, detail=""):
    _ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {name}" + (f"  ({detail})" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def bell_circuit(n=2):
    return evolution.Circuit(n, [evolution.Gate("H", [0]), evolution.Gate("CNOT", [0, 1])])


def taylor_exp(a, terms=30):
    """Truncated power series; independent of scipy."""
    a = np.asarray(a, dtype=complex)
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    return out
