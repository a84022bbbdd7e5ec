"""Shared pytest configuration.

The hypothesis deadline is disabled globally: several properties exercise
ODE/SDE propagation whose wall time varies with machine load, and timing is
asserted explicitly where it matters (the acceptance suite), not per example.
"""

import pytest
from hypothesis import HealthCheck, settings

from cdfilt.rng import RngStream

settings.register_profile(
    "cdfilt",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("cdfilt")


@pytest.fixture
def rng():
    """Fresh deterministic stream per test."""
    return RngStream(1234)
