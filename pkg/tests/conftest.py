import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_image(pixels) -> np.ndarray:
    """Build a small Image8 from a nested pixel list (rows of RGB triples)."""
    return np.asarray(pixels, dtype=np.uint8)


def random_image(rng, width=16, height=16) -> np.ndarray:
    return rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8)
