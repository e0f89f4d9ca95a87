import numpy as np
import pytest

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_lines():
    return ACCEPTANCE_LINES


@pytest.fixture
def rng():
    return np.random.default_rng(20250819)


@pytest.fixture
def make_ordered(rng):
    """Factory for random strictly increasing configurations, zero mean."""

    def _make(n, lo=0.2, hi=1.5):
        gaps = rng.uniform(lo, hi, size=n - 1)
        x = np.concatenate(([0.0], np.cumsum(gaps)))
        return x - x.mean()

    return _make
