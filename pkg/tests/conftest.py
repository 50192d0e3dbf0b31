import warnings

import pytest

from huplab.gaussmap import MapParams

# criterion lines collected by test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def params11():
    return MapParams(1, 1.0)


@pytest.fixture
def make_params():
    def make(p, beta):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return MapParams(p, beta)
    return make
