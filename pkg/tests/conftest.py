from __future__ import annotations

from fractions import Fraction as F

import pytest

from groupcert import catalog
from groupcert.plf import validate


@pytest.fixture(scope="session")
def gmi25():
    return catalog.gmi(F(2, 5))


@pytest.fixture(scope="session")
def triangle():
    return catalog.triangle_lifting_fixture()


@pytest.fixture(scope="session")
def lift():
    return catalog.build_fixture("diagonal_lift")


def zero_function(k: int, f):
    if k == 1:
        cells = [(((0,), (1,)), (0,), 0)]
    else:
        cells = [
            (((0, 0), (1, 0), (1, 1)), (0, 0), 0),
            (((0, 0), (1, 1), (0, 1)), (0, 0), 0),
        ]
    return validate(k, f, cells)


ALL_FIXTURES = ["gmi_2_5", "wrong_peak_2_5", "spike", "free_middle_slope", "diagonal_lift", "triangle_lifting"]


@pytest.fixture(scope="session")
def fixtures():
    return {name: catalog.build_fixture(name) for name in ALL_FIXTURES}


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "ACCEPTANCE_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
