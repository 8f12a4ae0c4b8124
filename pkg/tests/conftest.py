import numpy as np
import pytest

from mhdblowup.model import EosParams
from mhdblowup.solver import Grid2D


@pytest.fixture
def eos():
    return EosParams.normalized(2.0)


@pytest.fixture
def small_grid():
    return Grid2D(24, 48, 2.4, 2.4)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
