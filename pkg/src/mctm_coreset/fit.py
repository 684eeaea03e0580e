"""Weighted maximum-likelihood fitting with a limited-memory quasi-Newton method."""

import logging
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from ._rng import as_generator
from .basis import ramp
from .exceptions import FitDivergedError, InvalidConfigError, LineSearchStalled, NonpositiveLogArgumentError
from .model import DEFAULT_ETA, LossBreakdown, ModelParams, _check_weights, loss_and_gradient, n_strict, nll

logger = logging.getLogger(__name__)

ARMIJO_C1 = 1e-4
MAX_HALVINGS = 60

PARAMETRIZATIONS = ("monotone", "raw")
INITIALIZERS = ("identity", "random")


@dataclass(frozen=True)
class FitConfig:
    """Optimizer settings.

    ``tol`` bounds the Euclidean norm of the gradient of the *mean* loss
    (total divided by the weight sum) in the optimizer's own coordinates.
    """

    max_iters: int = 500
    tol: float = 1e-6
    parametrization: str = "monotone"
    initializer: str = "identity"
    seed: int = 0
    eta: float = DEFAULT_ETA
    memory: int = 10

    def __post_init__(self):
        if self.max_iters < 1:
            raise InvalidConfigError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.tol > 0:
            raise InvalidConfigError(f"tol must be positive, got {self.tol}")
        if self.parametrization not in PARAMETRIZATIONS:
            raise InvalidConfigError(f"parametrization must be one of {PARAMETRIZATIONS}")
        if self.initializer not in INITIALIZERS:
            raise InvalidConfigError(f"initializer must be one of {INITIALIZERS}")
        if not self.eta >= 0:
            raise InvalidConfigError(f"eta must be nonnegative, got {self.eta}")
        if self.memory < 1:
            raise InvalidConfigError("memory must be >= 1")


@dataclass(frozen=True)
class FitResult:
    params: ModelParams
    loss: LossBreakdown
    iterations: int
    converged: bool
    fit_time_s: float
    grad_norm: float = float("nan")
    status: str = ""
    n_evals: int = 0


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    iterations: int
    converged: bool
    status: str
    n_evals: int = 0
    history: list = field(default_factory=list)


def backtracking(fun, x, f, g, direction, step=1.0, c1=ARMIJO_C1, max_halvings=MAX_HALVINGS):
    """Armijo backtracking by halving.

    Non-finite trial values count as failures and halve the step. Returns
    ``(step, x_new, f_new, g_new, n_evals)``.

    Raises
    ------
    LineSearchStalled
        After ``max_halvings`` rejected trials.
    """
    slope = float(g @ direction)
    if not slope < 0:
        raise LineSearchStalled(f"not a descent direction (slope={slope:.3g})")
    for evals in range(1, max_halvings + 1):
        x_new = x + step * direction
        f_new, g_new = fun(x_new)
        if np.isfinite(f_new) and f_new <= f + c1 * step * slope:
            return step, x_new, f_new, g_new, evals
        step *= 0.5
    raise LineSearchStalled(f"no acceptable step after {max_halvings} halvings")


def lbfgs_direction(g, s_hist, y_hist):
    """Two-loop recursion: approximate ``-H^{-1} g`` from curvature pairs."""
    q = g.copy()
    alphas = []
    rhos = []
    for s, y in zip(reversed(s_hist), reversed(y_hist)):
        rho = 1.0 / (y @ s)
        a = rho * (s @ q)
        q -= a * y
        alphas.append(a)
        rhos.append(rho)
    if s_hist:
        s, y = s_hist[-1], y_hist[-1]
        q *= (s @ y) / (y @ y)
    for (s, y), a, rho in zip(zip(s_hist, y_hist), reversed(alphas), reversed(rhos)):
        b = rho * (y @ q)
        q += (a - b) * s
    return -q


def minimize_lbfgs(fun, x0, max_iters=500, gtol=1e-6, memory=10):
    """Minimise ``fun`` (returning ``(value, gradient)``) from ``x0``.

    A stalled line search ends the run without raising; the best iterate is
    returned with ``status="stalled"``.
    """
    x = np.asarray(x0, dtype=np.float64).copy()
    f, g = fun(x)
    n_evals = 1
    if not np.isfinite(f):
        raise FitDivergedError("objective is not finite at the starting point")
    s_hist, y_hist = [], []
    status = "max_iters"
    converged = False
    it = 0
    while True:
        gnorm = float(np.linalg.norm(g))
        if gnorm <= gtol:
            converged, status = True, "converged"
            break
        if it >= max_iters:
            break
        direction = lbfgs_direction(g, s_hist, y_hist)
        if not direction @ g < 0:
            s_hist.clear()
            y_hist.clear()
            direction = -g
        step0 = 1.0 if s_hist else min(1.0, 1.0 / gnorm)
        try:
            step, x_new, f_new, g_new, evals = backtracking(fun, x, f, g, direction, step0)
        except LineSearchStalled as exc:
            n_evals += MAX_HALVINGS
            if s_hist:
                # retry once along steepest descent with fresh memory
                s_hist.clear()
                y_hist.clear()
                continue
            logger.warning("line search stalled at iteration %d: %s", it, exc)
            status = "stalled"
            break
        n_evals += evals
        s = x_new - x
        y = g_new - g
        if s @ y > 1e-12 * float(np.linalg.norm(s) * np.linalg.norm(y)):
            s_hist.append(s)
            y_hist.append(y)
            if len(s_hist) > memory:
                s_hist.pop(0)
                y_hist.pop(0)
        x, f, g = x_new, f_new, g_new
        it += 1
    return OptimizeResult(x, float(f), g, it, converged, status, n_evals)


def _softplus(x):
    return np.logaddexp(0.0, x)


def _softplus_inv(y):
    y = np.asarray(y, dtype=np.float64)
    return np.where(y > 30, y, np.log(np.expm1(np.minimum(y, 30))))


class _Coordinates:
    """Map between the optimizer vector and (theta, lambda)."""

    def __init__(self, J, d, parametrization):
        self.J, self.d = J, d
        self.monotone = parametrization == "monotone"
        self.n_theta = J * d
        self.size = self.n_theta + n_strict(J)

    def unpack(self, x):
        raw = x[: self.n_theta].reshape(self.J, self.d)
        lam = x[self.n_theta :]
        if not self.monotone:
            return raw.copy(), lam.copy()
        theta = np.empty_like(raw)
        theta[:, 0] = raw[:, 0]
        theta[:, 1:] = raw[:, :1] + np.cumsum(_softplus(raw[:, 1:]), axis=1)
        return theta, lam.copy()

    def pack(self, theta, lam):
        theta = np.asarray(theta, dtype=np.float64)
        if self.monotone:
            inc = np.diff(theta, axis=1)
            if np.any(inc <= 0):
                raise InvalidConfigError("monotone parametrization needs strictly increasing theta")
            raw = np.concatenate([theta[:, :1], _softplus_inv(inc)], axis=1)
        else:
            raw = theta
        return np.concatenate([raw.ravel(), np.asarray(lam, dtype=np.float64).ravel()])

    def chain(self, x, grad_theta, grad_lam):
        if not self.monotone:
            return np.concatenate([grad_theta.ravel(), grad_lam])
        raw = x[: self.n_theta].reshape(self.J, self.d)
        out = np.empty_like(raw)
        out[:, 0] = grad_theta.sum(axis=1)
        tail = np.cumsum(grad_theta[:, ::-1], axis=1)[:, ::-1][:, 1:]
        out[:, 1:] = tail * expit(raw[:, 1:])
        return np.concatenate([out.ravel(), grad_lam])


def identity_init(expansion, weights=None):
    """Coefficients making each marginal transform the standardised identity.

    Uses the linear precision of the Bernstein basis: ``a(t) . ramp = t``.
    Returns ``(theta, lambda_strict)`` with ``lambda = 0``.
    """
    J, d = expansion.J, expansion.d
    if d < 2:
        raise InvalidConfigError("identity initialisation needs d >= 2")
    w = _check_weights(weights, expansion.n)
    r = ramp(d - 1)
    t = expansion.A @ r
    wsum = w.sum()
    mean = (w @ t) / wsum
    var = (w @ (t - mean) ** 2) / wsum
    sd = np.sqrt(np.maximum(var, 1e-6))
    theta = (r[None, :] - mean[:, None]) / sd[:, None]
    return theta, np.zeros(n_strict(J))


def _initial_point(expansion, w, config):
    theta, lam = identity_init(expansion, w)
    if config.initializer == "random":
        rng = as_generator(config.seed)
        inc = np.diff(theta, axis=1) * np.exp(rng.normal(0.0, 0.1, size=(theta.shape[0], theta.shape[1] - 1)))
        start = theta[:, :1] + rng.normal(0.0, 0.1, size=(theta.shape[0], 1))
        theta = np.concatenate([start, start + np.cumsum(inc, axis=1)], axis=1)
        lam = rng.normal(0.0, 0.1, size=lam.shape)
    return theta, lam


def fit(expansion, weights=None, config=None, init=None):
    """Fit an MCTM by weighted maximum likelihood.

    Parameters
    ----------
    expansion : BasisExpansion
    weights : array-like of shape (n,), optional
        Nonnegative observation weights (unit when omitted).
    config : FitConfig, optional
    init : ModelParams, optional
        Starting point overriding ``config.initializer``.

    Returns
    -------
    FitResult

    Raises
    ------
    FitDivergedError
        If the loss is not finite at the starting point.
    """
    config = config or FitConfig()
    if expansion.n < 1:
        raise InvalidConfigError("expansion is empty")
    w = _check_weights(weights, expansion.n)
    wsum = float(w.sum())
    if not wsum > 0:
        raise InvalidConfigError("weights sum to zero")
    start = time.perf_counter()
    coords = _Coordinates(expansion.J, expansion.d, config.parametrization)
    if init is not None:
        theta0, lam0 = init.theta, init.lambda_strict
    else:
        theta0, lam0 = _initial_point(expansion, w, config)
    x0 = coords.pack(theta0, lam0)
    A, Ap, eta = expansion.A, expansion.Aprime, config.eta
    wn = w / wsum

    def objective(x):
        theta, lam = coords.unpack(x)
        try:
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                br, gt, gl = loss_and_gradient(A, Ap, theta, lam, eta, wn)
        except NonpositiveLogArgumentError:
            return np.inf, np.zeros_like(x)
        return br.total, coords.chain(x, gt, gl)

    try:
        res = minimize_lbfgs(objective, x0, config.max_iters, config.tol, config.memory)
    except FitDivergedError as exc:
        exc.params = ModelParams(theta0, lam0, eta)
        raise
    theta, lam = coords.unpack(res.x)
    params = ModelParams(theta, lam, eta)
    loss = nll(expansion, params, w)
    if not np.isfinite(loss.total):
        raise FitDivergedError("final loss is not finite", params)
    elapsed = time.perf_counter() - start
    return FitResult(
        params=params,
        loss=loss,
        iterations=res.iterations,
        converged=res.converged,
        fit_time_s=elapsed,
        grad_norm=float(np.linalg.norm(res.grad)),
        status=res.status,
        n_evals=res.n_evals,
    )
