import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bosepd import MeanField, ModelParams  # noqa: E402

ACCEPTANCE = {}


def record(criterion: int, passed: bool, detail: str):
    ACCEPTANCE[criterion] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def default_params():
    return ModelParams(omega0=1.0, w=2.0, g=0.1, lam=0.0)


@pytest.fixture
def ext_solution(default_params):
    from bosepd import solve_extended
    return solve_extended(default_params).solution


@pytest.fixture
def rng():
    import numpy as np
    return np.random.default_rng(20261014)


@pytest.fixture
def sample_mf():
    return MeanField(1.3, -0.4)
