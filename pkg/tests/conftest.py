"""Shared fixtures and stack generators for the test suite."""

import numpy as np
import pytest

from planaremit.materials import Material
from planaremit.tmm import Layer, Stack


def random_lossless_stack(rng, max_layers=6):
    """Random stack of lossless constant-index layers between two
    lossless half-spaces.  Indices in [1, 4], thicknesses in [5, 400] nm."""
    n_layers = int(rng.integers(1, max_layers + 1))
    layers = tuple(
        Layer(Material.constant(f"m{i}", float(rng.uniform(1.0, 4.0))),
              float(rng.uniform(5.0, 400.0)))
        for i in range(n_layers)
    )
    below = Material.constant("sub", float(rng.uniform(1.0, 4.0)))
    above = Material.constant("amb", float(rng.uniform(1.0, 2.0)))
    return Stack(below=below, layers=layers, above=above)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def vacuum():
    return Material.constant("vacuum", 1.0)
