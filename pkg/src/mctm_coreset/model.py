"""MCTM parameters and the weighted negative log-likelihood.

For observation ``i`` and dimension ``j`` let ``h_ij = <theta_j, a_ij>`` and
``g_ij = <theta_j, a'_ij>``. With a unit lower-triangular ``Lambda`` the
loss is

    sum_i w_i sum_j [ 0.5 * (sum_{k<j} lambda_jk h_ik + h_ij)^2 - log max(g_ij, eta) ]

split into a squared part ``f1`` and the positive/negative parts ``f2``/``f3``
of the log term, so that ``total = f1 - f2 + f3``.
"""

import json
from dataclasses import dataclass

import numpy as np

from .basis import BasisConfig, ramp
from .exceptions import InfeasibleShiftError, InvalidConfigError, NonpositiveLogArgumentError

DEFAULT_ETA = 1e-6


def n_strict(J):
    return J * (J - 1) // 2


@dataclass(frozen=True)
class ModelParams:
    """Marginal coefficients and copula factor.

    Attributes
    ----------
    theta : ndarray of shape (J, d)
    lambda_strict : ndarray of shape (J*(J-1)/2,)
        Strictly lower entries of ``Lambda`` in ``np.tril_indices(J, -1)``
        order, i.e. (1,0), (2,0), (2,1), ...
    eta : float
        Floor applied to the log argument.
    """

    theta: np.ndarray
    lambda_strict: np.ndarray = None
    eta: float = DEFAULT_ETA

    def __post_init__(self):
        theta = np.array(self.theta, dtype=np.float64)
        if theta.ndim != 2:
            raise InvalidConfigError(f"theta must be 2-d (J, d), got shape {theta.shape}")
        J = theta.shape[0]
        lam = self.lambda_strict
        lam = np.zeros(n_strict(J)) if lam is None else np.array(lam, dtype=np.float64).ravel()
        if lam.shape != (n_strict(J),):
            raise InvalidConfigError(f"expected {n_strict(J)} lambda entries for J={J}, got {lam.size}")
        if not self.eta >= 0:
            raise InvalidConfigError(f"eta must be nonnegative, got {self.eta}")
        theta.setflags(write=False)
        lam.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "lambda_strict", lam)
        object.__setattr__(self, "eta", float(self.eta))

    @property
    def J(self):
        return self.theta.shape[0]

    @property
    def d(self):
        return self.theta.shape[1]

    @property
    def lambda_matrix(self):
        return lambda_matrix(self.lambda_strict, self.J)

    def with_eta(self, eta):
        return ModelParams(self.theta, self.lambda_strict, eta)

    def correlation(self):
        """Correlation matrix of the Gaussianised marginals implied by Lambda."""
        inv = np.linalg.inv(self.lambda_matrix)
        cov = inv @ inv.T
        sd = np.sqrt(np.diag(cov))
        return cov / np.outer(sd, sd)


@dataclass(frozen=True)
class LossBreakdown:
    f1: float
    f2: float
    f3: float
    total: float
    clamp_count: int = 0


def lambda_matrix(lambda_strict, J):
    L = np.eye(J)
    L[np.tril_indices(J, -1)] = lambda_strict
    return L


def _check_weights(weights, n):
    if weights is None:
        return np.ones(n)
    w = np.asarray(weights, dtype=np.float64).ravel()
    if w.shape != (n,):
        raise InvalidConfigError(f"expected {n} weights, got {w.size}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise InvalidConfigError("weights must be finite and nonnegative")
    return w


def _check_shapes(expansion, params):
    if (expansion.J, expansion.d) != (params.J, params.d):
        raise InvalidConfigError(
            f"params are (J={params.J}, d={params.d}) but expansion is "
            f"(J={expansion.J}, d={expansion.d})"
        )


def _forward(A, Ap, theta, lam, eta):
    H = np.einsum("njd,jd->nj", A, theta)
    G = np.einsum("njd,jd->nj", Ap, theta)
    L = lambda_matrix(lam, theta.shape[0])
    Z = H @ L.T
    if eta == 0:
        bad = G <= 0
        if bad.any():
            cell = np.argwhere(bad)[0]
            raise NonpositiveLogArgumentError(cell, G[tuple(cell)])
        clamped = np.zeros(G.shape, dtype=bool)
    else:
        clamped = G < eta
    logs = np.log(np.where(clamped, eta, G))
    return H, G, L, Z, clamped, logs


def _breakdown(Z, logs, clamped, w):
    f1 = 0.5 * np.sum(w * np.sum(Z * Z, axis=1))
    f2 = np.sum(w * np.sum(np.maximum(logs, 0.0), axis=1))
    f3 = np.sum(w * np.sum(np.maximum(-logs, 0.0), axis=1))
    return LossBreakdown(float(f1), float(f2), float(f3), float(f1 - f2 + f3), int(clamped.sum()))


def nll(expansion, params, weights=None):
    """Weighted negative log-likelihood and its three-part split.

    Raises
    ------
    NonpositiveLogArgumentError
        If ``params.eta == 0`` and some ``<theta_j, a'_ij>`` is not positive.
    """
    _check_shapes(expansion, params)
    w = _check_weights(weights, expansion.n)
    _, _, _, Z, clamped, logs = _forward(
        expansion.A, expansion.Aprime, params.theta, params.lambda_strict, params.eta
    )
    return _breakdown(Z, logs, clamped, w)


def per_observation_nll(expansion, params):
    """Unweighted loss contribution of each observation, shape (n,)."""
    _check_shapes(expansion, params)
    _, _, _, Z, _, logs = _forward(
        expansion.A, expansion.Aprime, params.theta, params.lambda_strict, params.eta
    )
    return 0.5 * np.sum(Z * Z, axis=1) - np.sum(logs, axis=1)


def loss_and_gradient(A, Ap, theta, lam, eta, w):
    """Array-level loss and gradient; the hot path for the optimizer.

    Returns ``(breakdown, grad_theta, grad_lambda)``. Clamped cells
    contribute no gradient.
    """
    H, G, L, Z, clamped, logs = _forward(A, Ap, theta, lam, eta)
    breakdown = _breakdown(Z, logs, clamped, w)
    GZ = w[:, None] * Z
    GH = GZ @ L
    grad_lam = (GZ.T @ H)[np.tril_indices(theta.shape[0], -1)]
    GG = np.where(clamped, 0.0, -w[:, None] / np.where(clamped, 1.0, G))
    grad_theta = np.einsum("nj,njd->jd", GH, A) + np.einsum("nj,njd->jd", GG, Ap)
    return breakdown, grad_theta, grad_lam


def nll_gradient(expansion, params, weights=None):
    """Analytic gradient of ``nll(...).total``.

    Returns
    -------
    grad_theta : ndarray of shape (J, d)
    grad_lambda : ndarray of shape (J*(J-1)/2,)
    """
    _check_shapes(expansion, params)
    w = _check_weights(weights, expansion.n)
    _, gt, gl = loss_and_gradient(
        expansion.A, expansion.Aprime, params.theta, params.lambda_strict, params.eta, w
    )
    return gt, gl


def normalization_shift(n, J, c=1.0):
    """Parameter-free constant ``n J (ln c + 1)`` that makes the loss nonnegative."""
    if c < 1:
        raise InvalidConfigError(f"c must be >= 1, got {c}")
    return n * J * (np.log(c) + 1.0)


def shift_into_domain(params, expansion, eta, direction=None):
    """Smallest nonnegative shift of each theta_j into the domain ``g_ij > eta``.

    The shift for dimension ``j`` is ``c_j * direction`` where the default
    direction is the Bernstein identity ramp ``(0, 1/M, ..., 1)``; its inner
    product with any Bernstein derivative row is ``1 / (hi_j - lo_j) > 0``.
    Dimensions already inside the domain are left unchanged.

    Raises
    ------
    InfeasibleShiftError
        If a cell at or below ``eta`` cannot be raised along ``direction``.
    """
    _check_shapes(expansion, params)
    if eta < 0:
        raise InvalidConfigError(f"eta must be nonnegative, got {eta}")
    d = params.d
    if direction is None:
        if d < 2:
            raise InfeasibleShiftError("ramp direction needs d >= 2; pass direction explicitly")
        direction = ramp(d - 1)
    direction = np.asarray(direction, dtype=np.float64)
    theta = params.theta.copy()
    G = np.einsum("njd,jd->nj", expansion.Aprime, theta)
    effect = np.einsum("njd,d->nj", expansion.Aprime, direction)
    changed = False
    for j in range(params.J):
        low = G[:, j] <= eta
        if not low.any():
            continue
        if np.any(effect[low, j] <= 0):
            raise InfeasibleShiftError(
                f"dimension {j}: shift direction does not raise every low log argument"
            )
        c = np.max((eta - G[low, j]) / effect[low, j])
        # cells already above eta but with negative effect must stay above
        neg = (~low) & (effect[:, j] < 0)
        if neg.any() and np.any(G[neg, j] + c * effect[neg, j] < eta):
            raise InfeasibleShiftError(f"dimension {j}: shift pushes other cells below eta")
        theta[j] = theta[j] + c * direction
        changed = True
    if not changed:
        return params
    return ModelParams(theta, params.lambda_strict, params.eta)


def params_to_dict(params, config=None):
    doc = {
        "degree": None if config is None else config.degree,
        "bounds": None if config is None else [[a, b] for a, b in zip(config.lo, config.hi)],
        "theta": params.theta.tolist(),
        "lambda": params.lambda_strict.tolist(),
        "eta": params.eta,
    }
    return doc


def params_from_dict(doc):
    """Inverse of :func:`params_to_dict`; returns ``(params, config_or_None)``."""
    params = ModelParams(doc["theta"], doc.get("lambda"), doc.get("eta", DEFAULT_ETA))
    config = None
    if doc.get("bounds") is not None and doc.get("degree") is not None:
        config = BasisConfig.from_dict({"degree": doc["degree"], "bounds": doc["bounds"]})
    return params, config


def save_params(path, params, config=None):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(params_to_dict(params, config), fh, indent=2)
        fh.write("\n")


def load_params(path):
    with open(path, encoding="utf-8") as fh:
        return params_from_dict(json.load(fh))
