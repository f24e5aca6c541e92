import numpy as np
import pytest

from gumira.geometry import sample_grid


@pytest.fixture(scope="session")
def grid10k():
    """10^4 points on a regular grid over [-5, 5]^2."""
    return sample_grid(-5.0, 5.0, 100)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Records one PASS/FAIL line for the acceptance summary."""
    def record(label, ok, detail):
        ACCEPTANCE_LINES.append(f"{label}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
