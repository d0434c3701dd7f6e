"""Shared fixtures for the solver test suites."""

import numpy as np
import pytest

from spectral_operations.basis import make_grid
from spectral_operations.harness import EXAMPLES, build_exact
from spectral_operations.operators import ModelParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_grid():
    return make_grid(8, 1.0)


@pytest.fixture
def grid32():
    return make_grid(32, 8.0)


@pytest.fixture
def unit_params():
    return ModelParams(alpha=1.0, beta=1.0, gamma=1.0, delta=1.0)


@pytest.fixture
def example1_family():
    return build_exact(EXAMPLES[1])


@pytest.fixture
def example3_family():
    return build_exact(EXAMPLES[3])
