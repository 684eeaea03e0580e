import numpy as np
import pytest

from mctm_coreset.dgp import NAMES, PROCESSES, DgpSpec, equicorrelated, generate, generate_all, resolve_id
from mctm_coreset.exceptions import InvalidConfigError


@pytest.mark.parametrize("i", sorted(PROCESSES))
def test_every_process_is_finite_and_reproducible(i):
    a = generate(DgpSpec(i, 500, seed=3))
    b = generate(DgpSpec(i, 500, seed=3))
    assert a.values.shape == (500, 2) and np.all(np.isfinite(a.values))
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, generate(DgpSpec(i, 500, seed=4)).values)
    assert a.meta["dgp"] == i


def test_resolve_id():
    assert resolve_id("9") == 9
    assert resolve_id("circular") == 9
    assert resolve_id(np.int64(3)) == 3
    assert len(NAMES) == 14
    for bad in (0, 15, "nope"):
        with pytest.raises(InvalidConfigError):
            resolve_id(bad)
    with pytest.raises(InvalidConfigError):
        DgpSpec(1, n=0)


def test_bivariate_normal_correlation():
    y = generate(DgpSpec(1, 100_000, 0)).values
    assert np.corrcoef(y.T)[0, 1] == pytest.approx(0.7, abs=0.01)


def test_circular_radius():
    y = generate(DgpSpec(9, 100_000, 0)).values
    r = np.hypot(y[:, 0], y[:, 1])
    assert r.mean() == pytest.approx(5.0, abs=0.02)
    assert r.std() == pytest.approx(1.0, abs=0.02)


def test_sinusoidal_residual_variance():
    y = generate(DgpSpec(14, 100_000, 0)).values
    assert np.var(y[:, 1] - 2 * np.sin(np.pi * y[:, 0])) == pytest.approx(0.25, abs=0.01)


def test_heteroscedastic_conditional_moments():
    y = generate(DgpSpec(6, 200_000, 0)).values
    # E[Y1] = E[X^2] = 3 for X ~ U(-3, 3)
    assert y[:, 0].mean() == pytest.approx(3.0, abs=0.05)


def test_marginals_of_copula_processes():
    clay = generate(DgpSpec(7, 100_000, 0)).values
    assert clay[:, 0].mean() == pytest.approx(2.0, abs=0.03)  # Gamma(2, 1)
    assert np.median(clay[:, 1]) == pytest.approx(1.0, abs=0.02)  # LogNormal(0, 1)
    tc = generate(DgpSpec(10, 100_000, 0)).values
    assert tc[:, 1].mean() == pytest.approx(1.0, abs=0.02)  # Exp(1)
    assert np.all(tc[:, 1] > 0)


def test_generate_all_uses_distinct_streams():
    data = generate_all(50, seed=1)
    assert sorted(data) == sorted(PROCESSES)
    assert not np.array_equal(data[1].values, generate(DgpSpec(1, 50, 1)).values)


def test_equicorrelated():
    d = equicorrelated(20_000, J=6, rho=0.5, seed=0)
    assert d.values.shape == (20_000, 6)
    assert np.all(d.values[:, 1] > 0)  # log-normal column
    assert np.corrcoef(d.values[:, [0, 3]].T)[0, 1] == pytest.approx(0.5, abs=0.03)
    with pytest.raises(InvalidConfigError):
        equicorrelated(10, J=1)
