import numpy as np
import pytest


def random_simplex(rng, n, floor=1e-6):
    """Random strictly interior simplex point (Dirichlet, floored)."""
    p = rng.dirichlet(np.ones(n))
    p = np.maximum(p, floor)
    return p / p.sum()


def random_tangent(rng, n, scale=1.0):
    u = rng.normal(size=n) * scale
    return u - u.mean()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
