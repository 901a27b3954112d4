import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_stochastic(rng, d_p, d_r):
    """Random row-stochastic matrix via normalized gamma draws."""
    g = rng.standard_gamma(1.0, size=(d_p, d_r))
    return g / g.sum(axis=1, keepdims=True)
