import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import comb

from mctm_coreset.basis import (
    BasisConfig, bernstein, bernstein_derivative, expand, fit_bounds, ramp, scale,
)
from mctm_coreset.exceptions import DegenerateColumnError, InvalidConfigError


def naive_bernstein(t, M):
    k = np.arange(M + 1)
    return comb(M, k) * t[:, None] ** k * (1 - t[:, None]) ** (M - k)


@pytest.mark.parametrize("M", [1, 2, 3, 6, 12])
def test_bernstein_matches_closed_form(M):
    t = np.linspace(0, 1, 37)
    np.testing.assert_allclose(bernstein(t, M), naive_bernstein(t, M), atol=1e-13)


@given(st.lists(st.floats(0, 1), min_size=1, max_size=20), st.integers(1, 15))
@settings(max_examples=60, deadline=None)
def test_partition_of_unity_and_nonnegativity(ts, M):
    B = bernstein(np.asarray(ts), M)
    assert np.all(B >= 0)
    np.testing.assert_allclose(B.sum(axis=1), 1.0, atol=1e-12)


@pytest.mark.parametrize("M", [1, 3, 6])
def test_derivative_matches_finite_differences(M):
    t = np.linspace(0.05, 0.95, 19)
    h = 1e-6
    fd = (naive_bernstein(t + h, M) - naive_bernstein(t - h, M)) / (2 * h)
    np.testing.assert_allclose(bernstein_derivative(t, M), fd, atol=1e-6)


def test_ramp_reproduces_identity():
    t = np.linspace(0, 1, 11)
    np.testing.assert_allclose(bernstein(t, 6) @ ramp(6), t, atol=1e-14)
    np.testing.assert_allclose(bernstein_derivative(t, 6) @ ramp(6), 1.0, atol=1e-12)


def test_fit_bounds_margin_and_scaling(rng):
    y = rng.normal(size=(50, 3))
    cfg = fit_bounds(y, 4, margin=0.1)
    rngs = y.max(0) - y.min(0)
    np.testing.assert_allclose(cfg.lo, y.min(0) - 0.1 * rngs)
    np.testing.assert_allclose(cfg.hi, y.max(0) + 0.1 * rngs)
    t, clipped = scale(y, cfg)
    assert clipped == 0 and np.all((t > 0) & (t < 1))


def test_expansion_shapes_and_chain_rule(rng):
    y = rng.normal(size=(30, 2))
    cfg = fit_bounds(y, 5)
    ex = expand(y, cfg)
    assert ex.A.shape == ex.Aprime.shape == (30, 2, 6)
    t, _ = scale(y, cfg)
    np.testing.assert_allclose(ex.Aprime[:, 1], bernstein_derivative(t[:, 1], 5) / cfg.width[1])


def test_out_of_range_values_are_clipped_and_counted():
    cfg = BasisConfig(3, [0.0], [1.0], "user")
    ex = expand(np.array([[-1.0], [0.5], [2.0]]), cfg)
    assert ex.clip_count == 2
    np.testing.assert_allclose(ex.A[0, 0], [1, 0, 0, 0])


def test_degenerate_column_is_named():
    y = np.column_stack([np.arange(5.0), np.ones(5)])
    with pytest.raises(DegenerateColumnError, match="y2"):
        fit_bounds(y, 3)


@pytest.mark.parametrize("kw", [dict(degree=0), dict(degree=2.5), dict(lo=[1.0], hi=[1.0]), dict(policy="x")])
def test_config_validation(kw):
    base = dict(degree=3, lo=[0.0], hi=[1.0])
    base.update(kw)
    with pytest.raises(InvalidConfigError):
        BasisConfig(**base)


def test_config_round_trip():
    cfg = BasisConfig(4, [0.0, -1.0], [2.0, 3.0], "user", 0.0)
    assert BasisConfig.from_dict(cfg.to_dict()) == cfg
