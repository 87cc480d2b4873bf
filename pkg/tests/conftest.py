import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def rand_matrix(rng, n, m=None):
    m = n if m is None else m
    return rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))


def rand_herm(rng, n):
    x = rand_matrix(rng, n)
    return (x + x.conj().T) / 2


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE = []


def record(criterion: str, ok: bool, detail: str):
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
