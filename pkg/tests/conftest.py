import math

import pytest
from hypothesis import settings

from tscalc.timescale import GeometricGrid, RealInterval, TimeScale

settings.register_profile("tscalc", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("tscalc")


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


@pytest.fixture
def Z():
    return TimeScale.integers()


@pytest.fixture
def R():
    return TimeScale.reals()


@pytest.fixture
def q2():
    return TimeScale.geometric(2.0)


@pytest.fixture
def mixed():
    """(-1, 0] dense followed by the closure of 2^Z."""
    return TimeScale([RealInterval(-1.0, 0.0), GeometricGrid(2.0)])


MIXED_SCALES = {
    "interval+qgrid": lambda: TimeScale([RealInterval(-1.0, 0.0), GeometricGrid(2.0)]),
    "qsym3": lambda: TimeScale.q_symmetric(3.0),
    "Z": TimeScale.integers,
    "halfZ": lambda: TimeScale.uniform(0.5),
    "reals": lambda: TimeScale.reals(-2.0, 2.0),
}


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
