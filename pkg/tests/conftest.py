import numpy as np
import pytest
from hypothesis import settings

from nsaclab.grid import Grid1D
from nsaclab.model import ModelParams

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture
def params():
    return ModelParams()


@pytest.fixture
def small_grid():
    return Grid1D(200.0, 512, -100.0)


def smooth_fields(grid, rng, amp=0.01, modes=6):
    """Random band-limited fields on ``grid`` (three components)."""
    out = np.zeros((3, grid.N))
    for c in range(3):
        for _ in range(modes):
            k = 2 * np.pi * rng.integers(1, 12) / grid.L
            out[c] += rng.normal() * np.cos(k * grid.x + rng.uniform(0, 2 * np.pi))
    return amp * out / np.abs(out).max()
