import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats

from penbm.stats import (WeightedSample, ecdf_eval, is_nonincreasing, ks_critical_value, ks_one_sample,
                         ks_two_sample, weighted_ecdf, z_test_difference, z_test_mean)

norm_cdf = stats.norm.cdf
REPS = 100


def test_weighted_sample_validation():
    with pytest.raises(ValueError):
        WeightedSample([])
    with pytest.raises(ValueError):
        WeightedSample([1.0, 2.0], [1.0])
    with pytest.raises(ValueError):
        WeightedSample([1.0, 2.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        WeightedSample([1.0], [-1.0])
    s = WeightedSample([1.0, 2.0, 3.0], [1.0, 1.0, 2.0])
    assert s.mean() == pytest.approx(2.25) and s.ess == pytest.approx(16 / 6)
    assert WeightedSample.from_log_weights([0.0, 1.0], [1000.0, 1000.0]).ess == pytest.approx(2.0)


def test_single_point_at_median():
    assert ks_one_sample([0.0], norm_cdf).statistic == pytest.approx(0.5)


def test_critical_value():
    n = 10**6
    assert ks_critical_value(n) * np.sqrt(n) == pytest.approx(1.358, abs=1e-3)


def test_identical_two_sample():
    x = np.random.default_rng(0).standard_normal(500)
    assert ks_two_sample(x, x).statistic == 0.0


@given(arrays(np.float64, st.integers(1, 50), elements=st.floats(-100, 100)),
       arrays(np.float64, 50, elements=st.floats(0.01, 10)))
def test_ecdf_properties(v, w):
    s = WeightedSample(v, w[: v.size])
    x, F = weighted_ecdf(s)
    assert np.all(np.diff(x) > 0) and np.all(np.diff(F) >= -1e-15)
    assert F[-1] == pytest.approx(1.0)
    assert ecdf_eval(s, x.min() - 1) == 0.0
    # right-continuity: value at a jump equals the value just after it
    np.testing.assert_allclose(ecdf_eval(s, x), F)


@given(arrays(np.float64, st.integers(5, 60), elements=st.floats(-5, 5), unique=True))
def test_ks_invariant_under_monotone_map(v):
    a = ks_one_sample(v, norm_cdf).statistic
    b = ks_one_sample(np.exp(v), lambda y: norm_cdf(np.log(y))).statistic
    assert a == pytest.approx(b, abs=1e-12)


def test_ks_one_sample_calibration():
    gen = np.random.default_rng(101)
    ok = sum(ks_one_sample(gen.standard_normal(10_000), norm_cdf).p_value > 0.01 for _ in range(REPS))
    assert ok >= 98


def test_ks_two_sample_calibration_and_power():
    gen = np.random.default_rng(102)
    ok = sum(ks_two_sample(gen.standard_normal(10_000), gen.standard_normal(10_000)).p_value > 0.01
             for _ in range(REPS))
    assert ok >= 98
    assert ks_two_sample(gen.standard_normal(10_000), 0.5 + gen.standard_normal(10_000)).p_value < 1e-6


def test_weighted_ks_calibration():
    # exponential draws reweighted to a half-normal target
    gen = np.random.default_rng(103)
    pv = []
    for _ in range(REPS):
        x = gen.exponential(size=10_000)
        lw = -x**2 / 2 + x
        pv.append(ks_one_sample(WeightedSample.from_log_weights(x, lw),
                                lambda y: 2 * norm_cdf(y) - 1).p_value)
    assert np.mean(np.array(pv) > 0.05 * 0.8) >= 0.95


def test_z_test():
    zt = z_test_mean(np.full(50, 2.0), 2.0)
    assert zt.z == 0.0 and zt.degenerate and zt.passed
    with pytest.raises(ValueError):
        z_test_mean(np.ones(10), 1.0)
    gen = np.random.default_rng(104)
    ok = sum(z_test_mean(gen.standard_normal(1000), 0.0).passed for _ in range(REPS))
    assert ok >= 99
    assert z_test_difference(1.0, 0.1, 1.2, 0.1).passed
    assert not z_test_difference(1.0, 0.1, 2.0, 0.1).passed


def test_is_nonincreasing():
    assert is_nonincreasing([3, 2, 2, 1])
    assert not is_nonincreasing([1, 2])
    assert is_nonincreasing([1.0, 1.05], rel_slack=0.1)
