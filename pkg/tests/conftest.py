import numpy as np
import pytest

from hsihqs import HsiCube


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_cube(rng, bands=4, height=16, width=16, lo=0.0, hi=1.0):
    data = rng.uniform(lo, hi, size=(bands, height, width)).astype(np.float32)
    return HsiCube(data)


@pytest.fixture
def small_cube(rng):
    return random_cube(rng)
