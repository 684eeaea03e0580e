"""Bernstein polynomial basis expansion on a bounded interval.

Each outcome dimension ``j`` is mapped affinely from ``[lo_j, hi_j]`` onto
``[0, 1]`` and evaluated in the degree-``M`` Bernstein basis. Derivative rows
are taken with respect to the raw (unscaled) value, so they carry the chain
rule factor ``1 / (hi_j - lo_j)``.
"""

from dataclasses import dataclass

import numpy as np

from .data import as_array, column_labels
from .exceptions import DegenerateColumnError, InvalidConfigError

DEFAULT_DEGREE = 6
DEFAULT_MARGIN = 0.01


@dataclass(frozen=True)
class BasisConfig:
    """Degree and per-dimension bounds of the basis.

    ``policy`` is ``"data"`` when the bounds came from the observed min/max
    (widened by ``margin`` times the range on each side) and ``"user"`` when
    they were supplied directly.
    """

    degree: int
    lo: tuple
    hi: tuple
    policy: str = "data"
    margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 1:
            raise InvalidConfigError(f"degree must be an integer >= 1, got {self.degree}")
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or not lo:
            raise InvalidConfigError("lo and hi must be nonempty and of equal length")
        for j, (a, b) in enumerate(zip(lo, hi)):
            if not (np.isfinite(a) and np.isfinite(b)) or not b > a:
                raise InvalidConfigError(f"dimension {j}: need hi > lo, got ({a}, {b})")
        if self.policy not in ("data", "user"):
            raise InvalidConfigError(f"unknown bound policy {self.policy!r}")
        object.__setattr__(self, "degree", int(self.degree))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def d(self):
        return self.degree + 1

    @property
    def J(self):
        return len(self.lo)

    @property
    def width(self):
        return np.asarray(self.hi) - np.asarray(self.lo)

    def to_dict(self):
        return {
            "degree": self.degree,
            "bounds": [[a, b] for a, b in zip(self.lo, self.hi)],
            "policy": self.policy,
            "margin": self.margin,
        }

    @classmethod
    def from_dict(cls, doc):
        bounds = doc["bounds"]
        return cls(
            degree=doc["degree"],
            lo=[b[0] for b in bounds],
            hi=[b[1] for b in bounds],
            policy=doc.get("policy", "user"),
            margin=doc.get("margin", 0.0),
        )


@dataclass(frozen=True)
class BasisExpansion:
    """Basis rows ``A[i, j] = a_j(y_ij)`` and derivative rows ``Aprime[i, j]``.

    Both arrays have shape (n, J, d).
    """

    A: np.ndarray
    Aprime: np.ndarray
    config: BasisConfig = None
    clip_count: int = 0

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.float64)
        Ap = np.asarray(self.Aprime, dtype=np.float64)
        if A.ndim != 3 or A.shape != Ap.shape:
            raise ValueError(f"A and Aprime must share a 3-d shape, got {A.shape} and {Ap.shape}")
        A.setflags(write=False)
        Ap.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "Aprime", Ap)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def J(self):
        return self.A.shape[1]

    @property
    def d(self):
        return self.A.shape[2]

    def subset(self, rows):
        rows = np.asarray(rows)
        return BasisExpansion(self.A[rows], self.Aprime[rows], self.config, 0)


def bernstein_levels(t, degree):
    """Bernstein values of degrees ``degree - 1`` and ``degree`` at ``t``.

    Built with the de Casteljau-style recurrence
    ``B[k, m] = (1 - t) B[k, m-1] + t B[k-1, m-1]``, which stays stable for
    high degrees where binomial-power formulas lose precision.

    Returns
    -------
    lower : ndarray of shape t.shape + (degree,)
    upper : ndarray of shape t.shape + (degree + 1,)
    """
    t = np.asarray(t, dtype=np.float64)
    s = 1.0 - t
    b = np.ones(t.shape + (1,))
    lower = b
    for m in range(1, degree + 1):
        lower = b
        nb = np.empty(t.shape + (m + 1,))
        nb[..., 0] = s * b[..., 0]
        nb[..., m] = t * b[..., m - 1]
        if m > 1:
            nb[..., 1:m] = s[..., None] * b[..., 1:m] + t[..., None] * b[..., : m - 1]
        b = nb
    return lower, b


def bernstein(t, degree):
    """Bernstein basis ``B_{k,M}(t)`` for k = 0..M, stacked on the last axis."""
    return bernstein_levels(t, degree)[1]


def bernstein_derivative(t, degree):
    """d/dt of the Bernstein basis: ``M (B_{k-1,M-1} - B_{k,M-1})``."""
    lower, _ = bernstein_levels(t, degree)
    return _derivative_from_lower(lower, degree)


def _derivative_from_lower(lower, degree):
    shape = lower.shape[:-1] + (degree + 1,)
    out = np.zeros(shape)
    out[..., 1:] += lower
    out[..., :-1] -= lower
    return degree * out


def fit_bounds(data, degree=DEFAULT_DEGREE, margin=DEFAULT_MARGIN, bounds=None):
    """Choose per-dimension bounds for the basis.

    Parameters
    ----------
    data : Dataset or array-like of shape (n, J)
    degree : int
    margin : float
        Fraction of each column's range added on both sides. With
        ``margin > 0`` every observation lies strictly inside its bounds.
    bounds : sequence of (lo, hi), optional
        User-supplied bounds; skips the data scan.
    """
    if bounds is not None:
        bounds = [tuple(b) for b in bounds]
        return BasisConfig(degree, [b[0] for b in bounds], [b[1] for b in bounds], "user", 0.0)
    y = as_array(data)
    if y.shape[0] < 2:
        raise InvalidConfigError("need at least two observations to fit bounds")
    if margin < 0:
        raise InvalidConfigError(f"margin must be nonnegative, got {margin}")
    lo = y.min(axis=0)
    hi = y.max(axis=0)
    names = column_labels(data)
    for j in range(y.shape[1]):
        if not hi[j] > lo[j]:
            raise DegenerateColumnError(names[j])
    pad = margin * (hi - lo)
    return BasisConfig(degree, lo - pad, hi + pad, "data", float(margin))


def scale(data, config):
    """Map raw values onto [0, 1]; returns (t, clip_count)."""
    y = as_array(data)
    if y.shape[1] != config.J:
        raise InvalidConfigError(f"data has {y.shape[1]} columns, config expects {config.J}")
    t = (y - np.asarray(config.lo)) / config.width
    outside = (t < 0.0) | (t > 1.0)
    return np.clip(t, 0.0, 1.0), int(outside.sum())


def expand(data, config):
    """Evaluate basis and derivative rows for every observation and dimension."""
    t, clipped = scale(data, config)
    lower, A = bernstein_levels(t, config.degree)
    Ap = _derivative_from_lower(lower, config.degree) / config.width[None, :, None]
    return BasisExpansion(A, Ap, config, clipped)


def ramp(degree):
    """Coefficients of the identity map t -> t in the Bernstein basis."""
    return np.arange(degree + 1, dtype=np.float64) / degree
