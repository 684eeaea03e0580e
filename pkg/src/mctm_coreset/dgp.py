"""The fourteen bivariate simulation processes, seeded and reproducible.

Every generator takes ``(n, rng)`` and returns an ``(n, 2)`` array. Constants
are fixed to the published values; sampler choices (skew-t by hidden
truncation, Clayton by gamma frailty, t-copula by chi-square mixing) are
the standard stochastic representations of the named distributions.
"""

from dataclasses import dataclass

import numpy as np
from scipy import stats

from ._rng import derive_seed, stream
from .data import Dataset
from .exceptions import InvalidConfigError

X_RANGE = (-3.0, 3.0)


def _mvn(rng, mean, cov, n):
    return rng.multivariate_normal(mean, cov, size=n, method="cholesky")


def _mixture(rng, n, comps):
    """Equal-weight mixture of ``comps`` (list of callables ``(rng, m)``)."""
    label = rng.integers(len(comps), size=n)
    out = np.empty((n, 2))
    for c, draw in enumerate(comps):
        rows = np.flatnonzero(label == c)
        out[rows] = draw(rng, rows.size)
    return out


def bivariate_normal(n, rng, rho=0.7):
    return _mvn(rng, [0.0, 0.0], [[1.0, rho], [rho, 1.0]], n)


def nonlinear_correlation(n, rng, noise_sd=0.5):
    """``Y1 = X^2 + e1``; ``Y2`` standard normal with correlation ``sin X`` to ``e1``."""
    x = rng.uniform(*X_RANGE, size=n)
    e1 = rng.normal(0.0, noise_sd, size=n)
    r = np.sin(x)
    y2 = r * (e1 / noise_sd) + np.sqrt(1.0 - r**2) * rng.normal(size=n)
    return np.column_stack([x**2 + e1, y2])


def normal_mixture(n, rng):
    return _mixture(rng, n, [
        lambda g, m: _mvn(g, [0.0, 0.0], [[1.0, 0.8], [0.8, 1.0]], m),
        lambda g, m: _mvn(g, [3.0, -2.0], [[1.5, -0.5], [-0.5, 1.5]], m),
    ])


def _circle(rng, m, r_mean, r_sd):
    theta = rng.uniform(0.0, 2.0 * np.pi, size=m)
    r = rng.normal(r_mean, r_sd, size=m)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def _cross(rng, m, half_length=3.0, noise_sd=0.2):
    # two perpendicular lines through the origin at +-45 degrees
    s = rng.uniform(-half_length, half_length, size=m)
    sign = np.where(rng.integers(2, size=m) == 0, 1.0, -1.0)
    pts = np.column_stack([s, sign * s]) / np.sqrt(2.0)
    return pts + rng.normal(0.0, noise_sd, size=(m, 2))


def geometric_mixed(n, rng):
    return _mixture(rng, n, [lambda g, m: _circle(g, m, 2.0, 0.2), _cross])


def skew_t(n, rng, xi=(0.0, 0.0), omega=((1.0, 0.5), (0.5, 1.0)), alpha=(5.0, -3.0), nu=4.0):
    """Skew-t via hidden truncation and a chi-square scale mixture."""
    omega = np.asarray(omega, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    sd = np.sqrt(np.diag(omega))
    corr = omega / np.outer(sd, sd)
    a = alpha
    delta = corr @ a / np.sqrt(1.0 + a @ corr @ a)
    cov = np.block([[np.ones((1, 1)), delta[None, :]], [delta[:, None], corr]])
    z = _mvn(rng, np.zeros(3), cov, n)
    x0, x = z[:, 0], z[:, 1:]
    sn = np.where(x0[:, None] > 0, x, -x)
    v = rng.chisquare(nu, size=n) / nu
    return np.asarray(xi) + sd * sn / np.sqrt(v)[:, None]


def heteroscedastic(n, rng):
    x = rng.uniform(*X_RANGE, size=n)
    y1 = rng.normal(x**2, np.exp(0.5 * x))
    y2 = rng.normal(np.sin(x), np.sqrt(np.abs(x)))
    return np.column_stack([y1, y2])


def clayton_copula(n, rng, theta=2.0):
    """Clayton(theta) copula via gamma frailty; Gamma(2, 1) and LogNormal(0, 1) marginals."""
    v = rng.gamma(1.0 / theta, 1.0, size=n)
    e = rng.exponential(size=(n, 2))
    u = (1.0 + e / v[:, None]) ** (-1.0 / theta)
    return np.column_stack([stats.gamma.ppf(u[:, 0], 2.0), stats.lognorm.ppf(u[:, 1], 1.0)])


def spiral(n, rng, noise_sd=0.5):
    t = rng.uniform(0.0, 3.0 * np.pi, size=n)
    r = 0.5 * t
    return np.column_stack([r * np.cos(t), r * np.sin(t)]) + rng.normal(0.0, noise_sd, size=(n, 2))


def circular(n, rng):
    return _circle(rng, n, 5.0, 1.0)


def t_copula(n, rng, rho=0.7, nu=3.0):
    """t copula through a common chi-square mixing variable; t5 and Exp(1) marginals."""
    z = _mvn(rng, [0.0, 0.0], [[1.0, rho], [rho, 1.0]], n)
    w = np.sqrt(rng.chisquare(nu, size=n) / nu)
    u = stats.t.cdf(z / w[:, None], nu)
    return np.column_stack([stats.t.ppf(u[:, 0], 5.0), stats.expon.ppf(u[:, 1])])


def piecewise(n, rng):
    y1 = rng.normal(0.0, 2.0, size=n)
    slope = np.select([y1 < -1, y1 < 1], [1.5, -0.5], -2.0)
    sd = np.where((y1 >= -1) & (y1 < 1), 0.8, 0.5)
    return np.column_stack([y1, slope * y1 + rng.normal(size=n) * sd])


def hourglass(n, rng):
    y1 = rng.normal(0.0, 2.0, size=n)
    return np.column_stack([y1, rng.normal(size=n) * np.sqrt(0.2 + 0.3 * y1**2)])


def bimodal_clusters(n, rng):
    return _mixture(rng, n, [
        lambda g, m: _mvn(g, [-2.0, 2.0], [[1.0, 0.8], [0.8, 1.0]], m),
        lambda g, m: _mvn(g, [2.0, 2.0], [[1.0, -0.7], [-0.7, 1.0]], m),
    ])


def sinusoidal(n, rng, noise_sd=0.5):
    y1 = rng.uniform(*X_RANGE, size=n)
    return np.column_stack([y1, 2.0 * np.sin(np.pi * y1) + rng.normal(0.0, noise_sd, size=n)])


PROCESSES = {
    1: ("bivariate-normal", bivariate_normal),
    2: ("nonlinear-correlation", nonlinear_correlation),
    3: ("normal-mixture", normal_mixture),
    4: ("geometric-mixed", geometric_mixed),
    5: ("skew-t", skew_t),
    6: ("heteroscedastic", heteroscedastic),
    7: ("clayton-copula", clayton_copula),
    8: ("spiral", spiral),
    9: ("circular", circular),
    10: ("t-copula", t_copula),
    11: ("piecewise", piecewise),
    12: ("hourglass", hourglass),
    13: ("bimodal-clusters", bimodal_clusters),
    14: ("sinusoidal", sinusoidal),
}
NAMES = {name: i for i, (name, _) in PROCESSES.items()}


def resolve_id(key):
    """Accept a process number (int or digit string) or its name."""
    if isinstance(key, str):
        key = key.strip()
        if key in NAMES:
            return NAMES[key]
        if key.isdigit():
            key = int(key)
    if isinstance(key, (int, np.integer)) and int(key) in PROCESSES:
        return int(key)
    raise InvalidConfigError(f"unknown data-generating process {key!r}; expected 1-14 or one of {sorted(NAMES)}")


@dataclass(frozen=True)
class DgpSpec:
    id: int
    n: int = 10_000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "id", resolve_id(self.id))
        if int(self.n) < 1:
            raise InvalidConfigError(f"n must be >= 1, got {self.n}")

    @property
    def name(self):
        return PROCESSES[self.id][0]


def generate(spec):
    """Draw ``spec.n`` rows from process ``spec.id``."""
    name, sampler = PROCESSES[spec.id]
    rng = stream(spec.seed, "dgp", spec.id)
    values = sampler(int(spec.n), rng)
    return Dataset(values, ("y1", "y2"), {"dgp": spec.id, "name": name, "n": int(spec.n), "seed": spec.seed})


def generate_all(n, seed):
    """One dataset per process with per-process seeds derived from ``seed``."""
    return {i: generate(DgpSpec(i, n, derive_seed(seed, "dgp-all", i))) for i in PROCESSES}


def equicorrelated(n, J=10, rho=0.5, seed=0):
    """Synthetic ``J``-dimensional data for scale tests.

    Equicorrelated Gaussian copula with alternating normal, log-normal and
    t5 marginals so that several transformations are non-trivial.
    """
    if J < 2:
        raise InvalidConfigError("J must be >= 2")
    rng = stream(seed, "equicorrelated", J)
    cov = np.full((J, J), rho) + (1.0 - rho) * np.eye(J)
    z = _mvn(rng, np.zeros(J), cov, n)
    y = z.copy()
    y[:, 1::3] = np.exp(z[:, 1::3])
    y[:, 2::3] = stats.t.ppf(stats.norm.cdf(z[:, 2::3]), 5.0)
    return Dataset(y, meta={"generator": "equicorrelated", "n": n, "J": J, "rho": rho, "seed": seed})
