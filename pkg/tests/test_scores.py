import numpy as np
import pytest

from conftest import random_expansion
from mctm_coreset.exceptions import InvalidConfigError
from mctm_coreset.scores import (
    block_matrix, leverage_scores, orthonormal_leverage, ridge_leverage, root_leverage,
    sampling_probabilities, scores_to_csv, sketched_leverage, stacked_rows,
)


def explicit_block_scores(ex):
    """Oracle: leverage of every row of the materialised block matrix, maxed per observation."""
    B = block_matrix(ex)
    Q, R = np.linalg.qr(B)
    r = int(np.sum(np.abs(np.diag(R)) > 1e-10 * np.abs(R).max()))
    U, _, _ = np.linalg.svd(B, full_matrices=False)
    lev = np.sum(U[:, :r] ** 2, axis=1)
    lev = lev.reshape(ex.n, ex.J)
    # disjoint column blocks: every row of observation i has the same leverage
    np.testing.assert_allclose(lev, np.broadcast_to(lev[:, :1], lev.shape), atol=1e-10)
    return lev[:, 0], r


def test_block_matrix_shape(rng):
    # J blocks of width d*J: (n*J) x (d*J^2)
    ex = random_expansion(rng, 20, 3, 3)
    assert block_matrix(ex).shape == (60, 36)


def test_exact_scores_match_explicit_block_matrix(rng):
    ex = random_expansion(rng, 20, 3, 3)
    oracle, r = explicit_block_scores(ex)
    lev = leverage_scores(ex, "exact")
    np.testing.assert_allclose(lev.u, oracle, atol=1e-10)
    assert lev.rank * ex.J == r


def test_scores_sum_to_rank_and_are_bounded(rng):
    ex = random_expansion(rng, 50, 2, 5)
    lev = leverage_scores(ex)
    assert np.all((lev.u >= 0) & (lev.u <= 1))
    assert lev.u.sum() == pytest.approx(lev.rank, rel=1e-10)


def test_rank_deficient_input(rng):
    ex = random_expansion(rng, 5, 2, 6)  # 5 rows, 14 columns
    lev = leverage_scores(ex)
    assert lev.rank == 5
    np.testing.assert_allclose(lev.u, 1.0, atol=1e-10)


def test_orthonormal_leverage_is_column_scaling_invariant(rng):
    M = rng.normal(size=(40, 5))
    u1, _ = orthonormal_leverage(M)
    u2, _ = orthonormal_leverage(M * np.array([1e3, 1, 1e-2, 5, 7]))
    np.testing.assert_allclose(u1, u2, atol=1e-10)


def test_sketch_approximates_exact(rng):
    ex = random_expansion(rng, 4000, 2, 3)
    exact = leverage_scores(ex, "exact").u
    approx = sketched_leverage(ex, 400, seed=1).u
    rel = np.abs(approx - exact) / exact
    assert np.median(rel) < 0.3
    assert leverage_scores(ex, "sketched", seed=1).method == "sketched"


def test_sampling_probabilities(rng):
    u = rng.uniform(size=10)
    sp = sampling_probabilities(u)
    np.testing.assert_allclose(sp.s, u + 0.1)
    assert sp.p.sum() == pytest.approx(1.0)
    with pytest.raises(InvalidConfigError):
        sampling_probabilities(np.array([-1.0, 1.0]))
    with pytest.raises(InvalidConfigError):
        leverage_scores(random_expansion(rng, 5, 1, 2), "bogus")


def test_noncanonical_baselines_warn(rng):
    ex = random_expansion(rng, 30, 2, 3)
    with pytest.warns(UserWarning):
        r = ridge_leverage(ex)
    assert np.all(r.u <= leverage_scores(ex).u + 1e-12)
    with pytest.warns(UserWarning):
        root_leverage(ex)


def test_csv_dump(tmp_path, rng):
    ex = random_expansion(rng, 8, 2, 2)
    lev = leverage_scores(ex)
    path = tmp_path / "s.csv"
    scores_to_csv(path, lev, sampling_probabilities(lev))
    arr = np.loadtxt(path, delimiter=",", skiprows=1)
    assert path.read_text().startswith("index,u,s,p\n")
    np.testing.assert_array_equal(arr[:, 1], lev.u)
    assert stacked_rows(ex).shape == (8, 6)
