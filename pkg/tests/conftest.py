import numpy as np
import pytest

from coarsectrl.coarsening import CoarseningMap
from coarsectrl.example1 import SUPPORTS
from coarsectrl.sbm import generate_membership


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def example_assign():
    return generate_membership(8, [3 / 8, 1 / 2, 1 / 8])


@pytest.fixture
def example_cmap():
    return CoarseningMap(supports=np.array(SUPPORTS), n=8)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS):
        passed, detail = RESULTS[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if passed else 'FAIL'}  {detail}")
