"""Shared test configuration.

Turns on the finite-value debug guard before the package is imported so
every field constructed during the tests is checked for NaN/inf, and
provides a deterministically seeded RNG fixture.
"""

import os

os.environ.setdefault("MACNS_DEBUG_FINITE", "1")

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20260824)
