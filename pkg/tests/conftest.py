import numpy as np
import pytest

from gglrlib.utils.prior.gng import Patch


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_patch(rng):
    def make(side, channels=1):
        return Patch(rng.uniform(size=(channels, side * side)), side=side)
    return make


@pytest.fixture
def plane():
    def make(side, a=2.0, b=3.0, d=1.0):
        rows, cols = np.mgrid[0:side, 0:side]
        return (a * rows + b * cols + d).astype(float).ravel()
    return make
