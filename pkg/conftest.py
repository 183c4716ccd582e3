"""
Shared pytest fixtures.
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from config import Config


@pytest.fixture
def rng():
    """Seeded generator so property tests are deterministic."""
    return np.random.default_rng(Config.DEFAULT_SEED)


@pytest.fixture
def phi_plus():
    v = np.zeros(4, dtype=np.complex128)
    v[0] = v[3] = 1 / np.sqrt(2)
    return np.outer(v, v.conj())


@pytest.fixture
def mixed4():
    return np.eye(4, dtype=np.complex128) / 4
