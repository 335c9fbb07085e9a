"""Shared pytest configuration and fixtures."""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session", autouse=True)
def _warm_kernel():
    """Compile the jitted simplex once so per-test timings are honest."""
    from hydrosp.lp import LinearProgram, solve_lp

    lp = LinearProgram(c=[1.0], A=[[1.0]], senses=(">=",), b=[1.0],
                       lb=[0.0], ub=[10.0])
    sol = solve_lp(lp)
    assert sol.ok and abs(sol.objective - 1.0) < 1e-9


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
