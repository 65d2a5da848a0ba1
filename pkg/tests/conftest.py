import numpy as np
import pytest

from ewinlse.spectral import SpectralField, make_grid


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def grid1d():
    return make_grid(1, (-16.0, 16.0), 512)


@pytest.fixture
def grid2d():
    return make_grid(2, (-8.0, 8.0), 64)


@pytest.fixture
def grid3d():
    return make_grid(3, (-4.0, 4.0), 16)


@pytest.fixture
def random_field(grid1d, rng):
    vals = rng.standard_normal(grid1d.shape) + 1j * rng.standard_normal(grid1d.shape)
    return SpectralField.from_values(grid1d, vals)
