import numpy as np
import pytest

from rrcma.benchmarks import make_problem


@pytest.fixture(scope="session")
def himmelblau():
    return make_problem("himmelblau", 2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
