import numpy as np
import pytest
from sklearn.base import clone

from mctm_coreset.estimators import MCTM, BernsteinBasis, MCTMCoreset
from mctm_coreset.exceptions import InvalidConfigError


@pytest.fixture
def data():
    rng = np.random.default_rng(0)
    return rng.multivariate_normal([0, 1], [[1, 0.6], [0.6, 2]], size=1500)


def test_basis_transformer(data):
    b = BernsteinBasis(degree=4).fit(data)
    X = b.transform(data)
    assert X.shape == (1500, 10)
    np.testing.assert_allclose(X.reshape(1500, 2, 5).sum(axis=2), 1.0)
    assert b.get_params() == {"degree": 4, "margin": 0.01, "bounds": None}
    with pytest.raises(ValueError):
        b.transform(data[:, :1])


def test_mctm_fit_score_transform(data):
    m = MCTM(degree=5, max_iters=1000).fit(data)
    Z = m.transform(data)
    assert Z.shape == (1500, 2)
    # latent coordinates are roughly standard normal
    np.testing.assert_allclose(Z.mean(axis=0), 0.0, atol=0.1)
    np.testing.assert_allclose(Z.std(axis=0), 1.0, atol=0.1)
    s = m.score_samples(data)
    assert s.shape == (1500,) and m.score(data) == pytest.approx(s.mean())
    # expected Gaussian log density: -log(2 pi) - log|Sigma| / 2 - J / 2
    logdet = np.log(1 * 2 - 0.6**2)
    assert m.score(data) == pytest.approx(-np.log(2 * np.pi) - 0.5 * logdet - 1, abs=0.05)


def test_sample_weight_and_clone(data):
    m = MCTM(degree=3)
    c = clone(m)
    assert c.get_params() == m.get_params()
    w = np.ones(len(data))
    a = m.fit(data, sample_weight=w).params_.theta
    b = clone(m).fit(data).params_.theta
    np.testing.assert_allclose(a, b)


def test_coreset_estimator(data):
    m = MCTMCoreset(method="l2-hull", k=100, degree=4, random_state=2).fit(data)
    assert len(m.coreset_) <= 100
    full = MCTM(degree=4).fit(data)
    assert m.score(data) > full.score(data) - 0.2
    with pytest.raises(InvalidConfigError):
        MCTMCoreset(method="x").fit(data)
    with pytest.raises(InvalidConfigError):
        m.fit(data, sample_weight=np.ones(len(data)))


def test_unfitted_raises(data):
    from sklearn.exceptions import NotFittedError
    with pytest.raises(NotFittedError):
        MCTM().transform(data)
