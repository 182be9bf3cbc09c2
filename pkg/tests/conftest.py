import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pucci_lab.geometry import DomainSpec, rasterize
from pucci_lab.pucci import EllipticityPair

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def half_ball_16():
    return rasterize(DomainSpec.half_ball(), 1.0 / 16)


@pytest.fixture(scope="session")
def half_ball_32():
    return rasterize(DomainSpec.half_ball(), 1.0 / 32)


@pytest.fixture
def ell12():
    return EllipticityPair(1.0, 2.0)


def zero_one(x1, x2, piece):
    """0 on the wall, 1 on the outer sphere."""
    return np.where(piece == 3, 1.0, 0.0)


# one summary line per acceptance criterion, filled in by tests/test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
