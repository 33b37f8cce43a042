"""Shared pytest fixtures for linoptsim tests."""

import pytest
import numpy as np
from hypothesis import settings
from scipy.stats import unitary_group

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.core.fock import FockState, ModeRegistry
from src.targets import epr_pair, spin_j_state
from tests.strategies import random_normalized_state

settings.register_profile("linoptsim", deadline=None, print_blob=True)
settings.load_profile("linoptsim")


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded random generator."""
    return np.random.default_rng(20240607)


@pytest.fixture
def two_beam_registry() -> ModeRegistry:
    """H and V modes of beams 1 and 2."""
    return ModeRegistry.from_beams(["1", "2"])


@pytest.fixture
def four_beam_registry() -> ModeRegistry:
    """H and V modes of beams 1 to 4."""
    return ModeRegistry.from_beams(["1", "2", "3", "4"])


@pytest.fixture
def epr_state() -> FockState:
    """EPR pair on beams 1 and 2."""
    return epr_pair("1", "2").state


@pytest.fixture
def spin1_state() -> FockState:
    """Four-photon spin-1 state on beams 1 and 2."""
    return spin_j_state(2).state


@pytest.fixture
def haar_4(rng: np.random.Generator) -> np.ndarray:
    """Haar-random 4x4 unitary."""
    return unitary_group.rvs(4, random_state=rng)


@pytest.fixture
def make_random_state():
    """Factory for random normalized states."""
    return random_normalized_state
