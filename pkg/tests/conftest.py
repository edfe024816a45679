import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_rgb(rng, h=32, w=32):
    return rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)


def random_mask(rng, h=16, w=16, p=0.4):
    return rng.random((h, w)) < p
