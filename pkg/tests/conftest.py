import numpy as np
import pytest

from bgmcs import WeightFunction

ACCEPTANCE_LINES: list[str] = []

FIGURE_CONFIGS = [(2, 0), (2, 1), (3, 0), (3, 1), (3, 2)]


@pytest.fixture(scope="session")
def quartic_weight():
    """A non-constant weight with n f(n)^2 increasing."""
    return WeightFunction.from_callable(lambda n: (1.0 + n) ** 0.25, 400)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
