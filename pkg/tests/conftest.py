import sys

import numpy as np
import pytest

from icregion import presets
from icregion.conditions import PAPER_CASE1, PAPER_CASE2


@pytest.fixture
def sym3():
    return presets.sym3()


@pytest.fixture
def case2():
    return presets.case2()


@pytest.fixture
def k4():
    return presets.k4()


@pytest.fixture
def adder3():
    return presets.adder3()


@pytest.fixture
def case1_pattern():
    return PAPER_CASE1


@pytest.fixture
def case2_pattern():
    return PAPER_CASE2


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


LOG2_3 = float(np.log2(3.0))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
