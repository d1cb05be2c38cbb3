import numpy as np
import pytest

from sgip.core import DensityField, GridSpec


@pytest.fixture
def grid_1d():
    """The 1-d benchmark lattice: [-60, 60] split into 150 bins of width 0.8."""
    return GridSpec(1, 60.0, 150)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def make_field(grid: GridSpec, values, time: float = 0.0) -> DensityField:
    return DensityField(grid, np.asarray(values, dtype=np.float64).ravel(), time)
