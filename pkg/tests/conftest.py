"""Configurations for unit tests."""

import math

import numpy as np
import pytest

from wwitness.fock import MixedState
from wwitness.optics import BeamSplitter, Network, PhaseShifter, WStateSpec
from wwitness.witness import bs_state


def _random_spec(rng: np.random.Generator, modes: int) -> WStateSpec:
    """Random complex W-state coefficients."""
    values = rng.normal(size=modes) + 1j * rng.normal(size=modes)
    return WStateSpec(tuple(values / np.linalg.norm(values)))


def _random_network(rng: np.random.Generator, modes: int, depth: int = 8) -> Network:
    """Random sequence of beam splitters and phase shifters."""
    elements = []
    for _ in range(depth):
        if modes > 1 and rng.random() < 0.6:
            elements.append(BeamSplitter(int(rng.integers(modes - 1)), float(rng.uniform(0, 2 * math.pi))))
        else:
            elements.append(PhaseShifter(int(rng.integers(modes)), float(rng.uniform(0, 2 * math.pi))))
    return Network(modes, tuple(elements))


@pytest.fixture(scope="session")
def random_spec():
    return _random_spec


@pytest.fixture(scope="session")
def random_network():
    return _random_network


@pytest.fixture
def symmetric3():
    return WStateSpec.symmetric(3)


@pytest.fixture
def w_a():
    """Asymmetric W state with coefficients (1/2, 1/2, 1/sqrt(2))."""
    return WStateSpec((0.5, 0.5, 1 / math.sqrt(2)))


@pytest.fixture
def rho123():
    """Equal mixture of two-mode Bell states, the third mode empty: biseparable with W-state fidelity 2/3."""
    return MixedState((1 / 3, bs_state(i, 3)) for i in range(3))
