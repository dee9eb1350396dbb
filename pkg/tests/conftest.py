import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from eas1d.field import Grid
from eas1d.kernel import PeriodizedKernel, PowerLawPairKernel

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def grid64():
    return Grid(64)


@pytest.fixture(scope="session")
def pair_kernel():
    return PowerLawPairKernel(1.2, 0.4, 1.0)


@pytest.fixture(scope="session")
def periodized(pair_kernel):
    return PeriodizedKernel(pair_kernel)


def random_field_values(rng, N, modes=8, mean=0.0):
    """Band-limited random samples on an N-point grid."""
    x = -0.5 + np.arange(N) / N
    k = np.arange(1, modes + 1)
    a, b = rng.standard_normal((2, modes))
    arg = 2 * np.pi * np.outer(x, k)
    return mean + np.cos(arg) @ a + np.sin(arg) @ b


ACCEPTANCE_LINES = {}


def record_criterion(number, ok, detail):
    """Remember one acceptance verdict for the terminal summary."""
    ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[number])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
