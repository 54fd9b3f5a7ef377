import numpy as np
import pytest

from heisgeo.core import HeisPoint


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


def random_point(rng, n, scale=1.0):
    return HeisPoint(rng.normal(size=n) * scale, rng.normal(size=n) * scale, rng.normal() * scale)
