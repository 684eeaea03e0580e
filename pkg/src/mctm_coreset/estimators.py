"""scikit-learn style estimators wrapping the functional API."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .basis import DEFAULT_DEGREE, DEFAULT_MARGIN, BasisConfig, expand, fit_bounds
from .coreset import DEFAULT_ALPHA, DEFAULT_EPSILON, METHODS, build_coreset
from .exceptions import InvalidConfigError
from .fit import FitConfig, fit
from .model import DEFAULT_ETA, _forward, per_observation_nll

LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


def _check_X(X, n_features=None):
    X = check_array(X, dtype=np.float64, ensure_2d=True, ensure_min_samples=1)
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(f"X has {X.shape[1]} columns, expected {n_features}")
    return X


class BernsteinBasis(TransformerMixin, BaseEstimator):
    """Bernstein basis expansion with bounds learned from the data.

    Parameters
    ----------
    degree : int, default=6
    margin : float, default=0.01
        Fraction of each column's range added on both sides of the bounds.
    bounds : sequence of (lo, hi) pairs, optional
        Fixed bounds; ``margin`` is then ignored.

    Attributes
    ----------
    config_ : BasisConfig
    n_features_in_ : int
    """

    def __init__(self, degree=DEFAULT_DEGREE, margin=DEFAULT_MARGIN, bounds=None):
        self.degree = degree
        self.margin = margin
        self.bounds = bounds

    def fit(self, X, y=None):
        X = _check_X(X)
        self.config_ = fit_bounds(X, self.degree, self.margin, self.bounds)
        self.n_features_in_ = X.shape[1]
        return self

    def expand(self, X):
        """Full :class:`BasisExpansion` (basis and derivative rows)."""
        check_is_fitted(self, "config_")
        return expand(_check_X(X, self.n_features_in_), self.config_)

    def transform(self, X):
        """Stacked basis rows, shape (n, J * (degree + 1))."""
        A = self.expand(X).A
        return A.reshape(A.shape[0], -1)


class MCTM(BaseEstimator):
    """Multivariate transformation model fitted by weighted maximum likelihood.

    Parameters
    ----------
    degree, margin, bounds
        Passed to :class:`BernsteinBasis`.
    eta : float, default=1e-6
        Floor on the log argument.
    max_iters, tol, parametrization, initializer, random_state
        Optimizer settings, see :class:`FitConfig`.

    Attributes
    ----------
    basis_ : BernsteinBasis
    params_ : ModelParams
    result_ : FitResult
    """

    def __init__(self, degree=DEFAULT_DEGREE, margin=DEFAULT_MARGIN, bounds=None, eta=DEFAULT_ETA,
                 max_iters=500, tol=1e-6, parametrization="monotone", initializer="identity",
                 random_state=0):
        self.degree = degree
        self.margin = margin
        self.bounds = bounds
        self.eta = eta
        self.max_iters = max_iters
        self.tol = tol
        self.parametrization = parametrization
        self.initializer = initializer
        self.random_state = random_state

    def _resolved_eta(self):
        return self.eta

    def _fit_config(self):
        return FitConfig(
            max_iters=self.max_iters, tol=self.tol, parametrization=self.parametrization,
            initializer=self.initializer, seed=self.random_state, eta=self._resolved_eta(),
        )

    def _fit_basis(self, X):
        self.basis_ = BernsteinBasis(self.degree, self.margin, self.bounds).fit(X)
        self.n_features_in_ = X.shape[1]
        return self.basis_.expand(X)

    def fit(self, X, y=None, sample_weight=None):
        X = _check_X(X)
        expansion = self._fit_basis(X)
        self.result_ = fit(expansion, sample_weight, self._fit_config())
        self.params_ = self.result_.params
        return self

    def _expand(self, X):
        check_is_fitted(self, "params_")
        return self.basis_.expand(_check_X(X, self.n_features_in_))

    def transform(self, X):
        """Latent Gaussian coordinates ``Lambda h(y)``, shape (n, J)."""
        ex = self._expand(X)
        p = self.params_
        return _forward(ex.A, ex.Aprime, p.theta, p.lambda_strict, p.eta)[3]

    def score_samples(self, X):
        """Per-observation log-density under the fitted model."""
        ex = self._expand(X)
        return -per_observation_nll(ex, self.params_) - ex.J * LOG_SQRT_2PI

    def score(self, X, y=None):
        """Mean log-density of ``X``."""
        return float(np.mean(self.score_samples(X)))


class MCTMCoreset(MCTM):
    """MCTM fitted on a weighted coreset of the training data.

    Parameters
    ----------
    method : {"uniform", "l2-only", "l2-hull"}, default="l2-hull"
    k : int, default=100
        Coreset size.
    alpha : float, default=0.8
        Share of ``k`` drawn by leverage sampling (``l2-hull`` only).
    epsilon : float, default=1e-3
        Hull tolerance.
    eta : float, optional
        Log-argument floor; defaults to ``2 * epsilon``.
    **MCTM parameters

    Attributes
    ----------
    coreset_ : CoresetSample
        Indices into the training data and their weights.
    """

    def __init__(self, method="l2-hull", k=100, alpha=DEFAULT_ALPHA, epsilon=DEFAULT_EPSILON,
                 degree=DEFAULT_DEGREE, margin=DEFAULT_MARGIN, bounds=None, eta=None,
                 max_iters=500, tol=1e-6, parametrization="monotone", initializer="identity",
                 random_state=0):
        super().__init__(degree, margin, bounds, eta, max_iters, tol, parametrization,
                         initializer, random_state)
        self.method = method
        self.k = k
        self.alpha = alpha
        self.epsilon = epsilon

    def _resolved_eta(self):
        return 2.0 * self.epsilon if self.eta is None else self.eta

    def fit(self, X, y=None, sample_weight=None):
        if sample_weight is not None:
            raise InvalidConfigError("MCTMCoreset computes its own weights; sample_weight is not supported")
        if self.method not in METHODS:
            raise InvalidConfigError(f"unknown coreset method {self.method!r}; expected one of {METHODS}")
        X = _check_X(X)
        expansion = self._fit_basis(X)
        self.coreset_ = build_coreset(expansion, self.method, int(self.k), seed=self.random_state,
                                      alpha=self.alpha, epsilon=self.epsilon)
        sub = expansion.subset(self.coreset_.indices)
        self.result_ = fit(sub, self.coreset_.weights, self._fit_config())
        self.params_ = self.result_.params
        return self


__all__ = ["BernsteinBasis", "MCTM", "MCTMCoreset", "BasisConfig"]
