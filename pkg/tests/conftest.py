import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qdiscord.states import DensityMatrix  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def hs(rng):
    """Factory for HS-random DensityMatrix objects built by the test oracle."""
    from oracles import hs_state

    def make(dim_a, dim_b):
        return DensityMatrix(dim_a, dim_b, hs_state(dim_a * dim_b, rng))

    return make


ACCEPTANCE_RESULTS = {}


def record_criterion(number, title, passed, detail):
    ACCEPTANCE_RESULTS[number] = (title, bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        title, passed, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}")
