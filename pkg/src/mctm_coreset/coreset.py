"""Weighted observation subsets: uniform, leverage-only and leverage + hull."""

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ._rng import as_generator
from .exceptions import InvalidConfigError
from .hull import hull_augmentation
from .scores import leverage_scores, sampling_probabilities

METHODS = ("uniform", "l2-only", "l2-hull")
DEFAULT_ALPHA = 0.8
DEFAULT_EPSILON = 1e-3


@dataclass(frozen=True)
class CoresetSample:
    """Distinct observation indices with positive weights.

    ``k_target`` is the requested size; merging duplicate draws can only
    shrink the sample.
    """

    indices: np.ndarray
    weights: np.ndarray
    method: str
    k_target: int
    alpha: float = None
    seed: int = None
    sample_time_s: float = 0.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        w = np.asarray(self.weights, dtype=np.float64)
        if idx.shape != w.shape or idx.ndim != 1:
            raise ValueError("indices and weights must be 1-d and aligned")
        if np.unique(idx).size != idx.size:
            raise ValueError("coreset indices must be distinct")
        if np.any(w <= 0):
            raise ValueError("coreset weights must be positive")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.indices.size

    def metadata(self):
        return {
            "method": self.method,
            "k": self.k_target,
            "size": len(self),
            "alpha": self.alpha,
            "seed": self.seed,
            "sample_time_s": self.sample_time_s,
            **self.extra,
        }

    def to_csv(self, path, meta_path=None):
        """Write ``index,weight`` rows and, optionally, a JSON metadata file."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("index,weight\n")
            for i, w in zip(self.indices, self.weights):
                fh.write(f"{int(i)},{float(w)!r}\n")
        if meta_path is not None:
            with open(meta_path, "w", encoding="utf-8") as fh:
                json.dump(self.metadata(), fh, indent=2, sort_keys=True)
                fh.write("\n")

    @classmethod
    def from_csv(cls, path, meta_path=None):
        arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        meta = {}
        if meta_path is not None:
            with open(meta_path, encoding="utf-8") as fh:
                meta = json.load(fh)
        return cls(
            arr[:, 0].astype(np.int64),
            arr[:, 1],
            meta.get("method", "unknown"),
            meta.get("k", arr.shape[0]),
            meta.get("alpha"),
            meta.get("seed"),
            meta.get("sample_time_s", 0.0),
        )


def _merge(indices, weights):
    """Sum weights of repeated indices; output sorted by index."""
    uniq, inv = np.unique(np.asarray(indices, dtype=np.int64), return_inverse=True)
    merged = np.zeros(uniq.size)
    np.add.at(merged, inv, np.asarray(weights, dtype=np.float64))
    return uniq, merged


def sample_uniform(n, k, seed=None):
    """``k`` distinct indices uniformly without replacement, each weighted ``n/k``."""
    if not 1 <= k <= n:
        raise InvalidConfigError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = as_generator(seed)
    start = time.perf_counter()
    idx = np.sort(rng.choice(n, size=k, replace=False))
    w = np.full(k, n / k)
    return CoresetSample(idx, w, "uniform", k, None, _seed_tag(seed), time.perf_counter() - start)


def _seed_tag(seed):
    return int(seed) if isinstance(seed, (int, np.integer)) else None


def _draw_l2(p, k, rng):
    draws = rng.choice(p.size, size=k, replace=True, p=p)
    return _merge(draws, 1.0 / (k * p[draws]))


def sample_l2(probabilities, k, seed=None):
    """``k`` independent draws from ``p``; each draw adds ``1/(k p_i)`` to its weight."""
    p = getattr(probabilities, "p", probabilities)
    p = np.asarray(p, dtype=np.float64)
    if k < 1:
        raise InvalidConfigError(f"k must be >= 1, got {k}")
    if p.ndim != 1 or np.any(p < 0) or not math.isclose(p.sum(), 1.0, rel_tol=0, abs_tol=1e-9):
        raise InvalidConfigError("probabilities must be a nonnegative vector summing to 1")
    rng = as_generator(seed)
    start = time.perf_counter()
    idx, w = _draw_l2(p, k, rng)
    return CoresetSample(idx, w, "l2-only", k, 1.0, _seed_tag(seed), time.perf_counter() - start)


def split_sizes(k, alpha):
    """Sizes ``(k1, k2)`` of the sensitivity sample and the hull augmentation."""
    if not 0 < alpha <= 1:
        raise InvalidConfigError(f"alpha must lie in (0, 1], got {alpha}")
    k1 = int(math.floor(alpha * k))
    return k1, k - k1


def sample_hybrid(expansion, probabilities, k, alpha=DEFAULT_ALPHA, epsilon=DEFAULT_EPSILON, seed=None, pooled=True):
    """Sensitivity sample of size ``floor(alpha k)`` plus hull observations of weight 1.

    An observation picked by both parts keeps the sum of its weights.
    """
    if k < 2:
        raise InvalidConfigError(f"hybrid sampling needs k >= 2, got {k}")
    k1, k2 = split_sizes(k, alpha)
    p = np.asarray(getattr(probabilities, "p", probabilities), dtype=np.float64)
    rng = as_generator(seed)
    start = time.perf_counter()
    parts_idx, parts_w = [], []
    if k1 > 0:
        i1, w1 = _draw_l2(p, k1, rng)
        parts_idx.append(i1)
        parts_w.append(w1)
    hull_obs = hull_augmentation(expansion, k2, epsilon, rng, pooled=pooled)
    if hull_obs.size:
        parts_idx.append(hull_obs)
        parts_w.append(np.ones(hull_obs.size))
    idx, w = _merge(np.concatenate(parts_idx), np.concatenate(parts_w))
    elapsed = time.perf_counter() - start
    return CoresetSample(
        idx, w, "l2-hull", k, alpha, _seed_tag(seed), elapsed,
        {"k1": k1, "k2": k2, "epsilon": epsilon, "hull_observations": hull_obs.tolist()},
    )


def build_coreset(expansion, method, k, seed=None, alpha=DEFAULT_ALPHA, epsilon=DEFAULT_EPSILON,
                  score_method="auto", pooled=True):
    """Scores plus sampling for one method; ``sample_time_s`` covers both."""
    if method not in METHODS:
        raise InvalidConfigError(f"unknown coreset method {method!r}; expected one of {METHODS}")
    rng = as_generator(seed)
    start = time.perf_counter()
    if method == "uniform":
        sample = sample_uniform(expansion.n, k, rng)
    else:
        scores = leverage_scores(expansion, score_method, seed=rng)
        probs = sampling_probabilities(scores)
        if method == "l2-only":
            sample = sample_l2(probs, k, rng)
        else:
            sample = sample_hybrid(expansion, probs, k, alpha, epsilon, rng, pooled)
    elapsed = time.perf_counter() - start
    return CoresetSample(
        sample.indices, sample.weights, sample.method, k, sample.alpha,
        _seed_tag(seed), elapsed, sample.extra,
    )
