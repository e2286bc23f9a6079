import numpy as np
import pytest

from nlcflow.grid import Field, Grid, random_band_limited


@pytest.fixture
def grid2d() -> Grid:
    return Grid(2, 32)


@pytest.fixture
def grid3d() -> Grid:
    return Grid(3, 16)


def smooth_field(grid: Grid, seed: int = 0, components: int = 1,
                 kmax: int = 3, decay: float = 0.7) -> Field:
    rng = np.random.default_rng(seed)
    return random_band_limited(grid, rng, components, kmax, decay)
