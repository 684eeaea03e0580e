"""Leverage scores of the squared-part design and sampling probabilities.

The squared part of the loss is a quadratic form in a block matrix whose
rows for observation ``i`` place the concatenated basis row
``b_i = (a_i1, ..., a_iJ)`` in disjoint column blocks. Every such row shares
the leverage of ``b_i`` inside the stacked ``n x (dJ)`` matrix, so one score
per observation is enough.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.linalg

from ._rng import as_generator
from .exceptions import DegenerateInputError, InvalidConfigError

EXACT_MAX_ENTRIES = 50_000_000
RANK_RTOL = 1e-10


@dataclass(frozen=True)
class LeverageScores:
    u: np.ndarray
    rank: int
    method: str


@dataclass(frozen=True)
class SamplingProbabilities:
    p: np.ndarray
    s: np.ndarray


def stacked_rows(expansion):
    """Row ``i`` is the concatenation ``(a_i1, ..., a_iJ)``; shape (n, d*J)."""
    A = expansion.A if hasattr(expansion, "A") else np.asarray(expansion)
    return np.ascontiguousarray(A.reshape(A.shape[0], -1))


def block_matrix(expansion):
    """Materialise the full (nJ, dJ^2) block matrix. Small inputs only."""
    b = stacked_rows(expansion)
    n, dJ = b.shape
    J = expansion.J
    B = np.zeros((n * J, dJ * J))
    for j in range(J):
        B[j::J, j * dJ : (j + 1) * dJ] = b
    return B


def _rank_from_r(R):
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0:
        return 0
    return int(np.sum(diag > RANK_RTOL * diag[0] * max(R.shape)))


def orthonormal_leverage(M):
    """Squared row norms of a rank-revealing orthonormal basis of ``col(M)``."""
    M = np.asarray(M, dtype=np.float64)
    if not np.any(M):
        raise DegenerateInputError("matrix is identically zero")
    Q, R, _ = scipy.linalg.qr(M, mode="economic", pivoting=True)
    r = _rank_from_r(R)
    Qr = Q[:, :r]
    return np.einsum("ij,ij->i", Qr, Qr), r


def leverage_scores(expansion, method="exact", sketch_dim=None, seed=None):
    """Per-observation l2 leverage scores.

    Parameters
    ----------
    method : {"exact", "sketched", "auto"}
        ``"auto"`` uses the exact pivoted QR up to ``EXACT_MAX_ENTRIES``
        stacked entries and the sketch beyond.
    """
    b = stacked_rows(expansion)
    if method == "auto":
        method = "exact" if b.size <= EXACT_MAX_ENTRIES else "sketched"
    if method == "sketched":
        dim = sketch_dim or min(b.shape[0], max(4 * b.shape[1] ** 2, 20 * b.shape[1]))
        return sketched_leverage(expansion, dim, seed)
    if method != "exact":
        raise InvalidConfigError(f"unknown leverage method {method!r}")
    u, r = orthonormal_leverage(b)
    return LeverageScores(np.clip(u, 0.0, 1.0), r, "exact-qr")


def _srht(b, sketch_dim, rng):
    """Subsampled randomized trigonometric transform of the rows of ``b``.

    Random signs, an orthonormal DCT along the rows, then ``sketch_dim`` rows
    kept without replacement and rescaled. With ``sketch_dim == n`` the map
    is orthogonal.
    """
    n = b.shape[0]
    signs = rng.choice([-1.0, 1.0], size=n)
    mixed = scipy.fft.dct(signs[:, None] * b, type=2, norm="ortho", axis=0)
    if sketch_dim >= n:
        return mixed
    keep = np.sort(rng.choice(n, size=sketch_dim, replace=False))
    return mixed[keep] * np.sqrt(n / sketch_dim)


def sketched_leverage(expansion, sketch_dim, seed=None):
    """Constant-factor leverage approximation from a row sketch.

    The triangular factor of the sketched matrix stands in for the exact one:
    ``u_i ~ |b_i R^{-1}|^2`` restricted to the numerical rank.
    """
    b = stacked_rows(expansion)
    n, dJ = b.shape
    if sketch_dim < dJ:
        raise InvalidConfigError(f"sketch_dim={sketch_dim} is below the column count {dJ}")
    if not np.any(b):
        raise DegenerateInputError("matrix is identically zero")
    rng = as_generator(seed)
    sk = _srht(b, sketch_dim, rng)
    _, R, piv = scipy.linalg.qr(sk, mode="economic", pivoting=True)
    r = _rank_from_r(R)
    X = scipy.linalg.solve_triangular(R[:r, :r], b[:, piv[:r]].T, trans="T").T
    u = np.einsum("ij,ij->i", X, X)
    return LeverageScores(np.clip(u, 0.0, 1.0), r, "sketched")


def sampling_probabilities(scores):
    """``s_i = u_i + 1/n`` normalised to a probability vector."""
    u = scores.u if isinstance(scores, LeverageScores) else np.asarray(scores, dtype=np.float64)
    if u.ndim != 1 or u.size == 0 or np.any(u < 0) or not np.all(np.isfinite(u)):
        raise InvalidConfigError("leverage scores must be a nonempty, finite, nonnegative vector")
    s = u + 1.0 / u.size
    return SamplingProbabilities(s / s.sum(), s)


def ridge_leverage(expansion, gamma=None):
    """Ridge leverage ``diag(b (b'b + gamma I)^{-1} b')``.

    Not part of the canonical construction; kept for comparison runs only.
    """
    warnings.warn("ridge leverage scores are a non-canonical baseline", stacklevel=2)
    b = stacked_rows(expansion)
    G = b.T @ b
    if gamma is None:
        gamma = 1e-3 * np.trace(G) / G.shape[0]
    X = scipy.linalg.solve(G + gamma * np.eye(G.shape[0]), b.T, assume_a="pos")
    u = np.einsum("ij,ji->i", b, X)
    return LeverageScores(np.clip(u, 0.0, 1.0), int(np.linalg.matrix_rank(b)), "ridge")


def root_leverage(expansion):
    """Square-rooted exact leverage scores. Non-canonical comparison baseline."""
    warnings.warn("root leverage scores are a non-canonical baseline", stacklevel=2)
    base = leverage_scores(expansion, "exact")
    return LeverageScores(np.sqrt(base.u), base.rank, "root")


def scores_to_csv(path, scores, probabilities):
    u = scores.u if isinstance(scores, LeverageScores) else np.asarray(scores)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("index,u,s,p\n")
        for i, (ui, si, pi) in enumerate(zip(u, probabilities.s, probabilities.p)):
            fh.write(f"{i},{float(ui)!r},{float(si)!r},{float(pi)!r}\n")
