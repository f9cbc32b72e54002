import numpy as np
import pytest

from jetpaths.symexpr import SampleConfig

# lines appended by the acceptance module, echoed after the run
ACCEPTANCE_LINES: list = []


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def cfg():
    return SampleConfig()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
