import numpy as np
import pytest

from mctm_coreset.basis import expand, fit_bounds
from mctm_coreset.model import ModelParams, n_strict


def random_expansion(rng, n, J, degree):
    y = rng.normal(size=(n, J)) * rng.uniform(0.5, 2.0, size=J) + rng.normal(size=J)
    return expand(y, fit_bounds(y, degree))


def random_params(rng, J, d, eta=1e-6):
    """Increasing coefficients (positive derivative) and a random Lambda."""
    steps = rng.uniform(0.2, 1.5, size=(J, d - 1))
    start = rng.normal(size=(J, 1)) - 1.0
    theta = np.concatenate([start, start + np.cumsum(steps, axis=1)], axis=1)
    return ModelParams(theta, rng.normal(0.0, 0.5, size=n_strict(J)), eta)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
