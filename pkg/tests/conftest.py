import numpy as np
import pytest

from twophoton.core import default_theta_grid, reference_setup

A = 0.13e-3
B = 0.4e-3
LAM = 916e-9


@pytest.fixture
def reference():
    return reference_setup()


@pytest.fixture
def reference_at_crystal():
    return reference_setup(distance_from_crystal=0.0)


@pytest.fixture
def coarse_reference():
    """Reference geometry on a 201-point grid, for Monte Carlo runs."""
    return reference_setup(theta_grid=default_theta_grid(n_points=201))


@pytest.fixture
def theta():
    return default_theta_grid()


def rms(x, y):
    return float(np.sqrt(np.mean((np.asarray(x) - np.asarray(y)) ** 2)))


ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        status, title, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d} {status}: {title} | {detail}")
