import numpy as np
import pytest

from sphereflow.profiles import initial_profiles
from sphereflow.runner import run
from sphereflow.solver import GasParams, init


@pytest.fixture(scope="session")
def gas():
    return GasParams(a=1.0, gamma=1.4, mu=1.0, lam=0.0)


@pytest.fixture(scope="session")
def perturbed_run(gas):
    """Polynomial-bump data (amplitude 1e-3), N=3, J=64, to t=0.2."""
    rho0, u0 = initial_profiles("polynomial-bump", 1.0, 1e-3)
    s0 = init(rho0, u0, 1.0, 3, gas, 64)
    return run(s0, gas, 0.2, output_interval=0.05)


@pytest.fixture(scope="session")
def static_run():
    params = GasParams(a=1.0, gamma=2.0, mu=0.5, lam=0.0)
    s0 = init(1.0, 0.0, 1.0, 3, params, 32)
    return params, run(s0, params, 0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
