import numpy as np
import pytest

from frictionfield.cloud import PointCloud


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_cloud(rng, n=50, scale=0.5):
    positions = rng.uniform(-scale, scale, size=(n, 3))
    colors = rng.random(size=(n, 3))
    return PointCloud(positions, colors)
