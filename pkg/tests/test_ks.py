import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from gbelab import InvalidParameterError
from gbelab.stats.ks import ks_statistic, ks_two_sample


def expcdf(rate):
    return lambda x: 1 - np.exp(-rate * np.asarray(x))


def test_empty_sample():
    with pytest.raises(InvalidParameterError):
        ks_statistic([], expcdf(1.0))


@given(st.integers(1, 500))
def test_quantile_sample_statistic(m):
    q = stats.norm.ppf((np.arange(1, m + 1) - 0.5) / m)
    assert ks_statistic(q, stats.norm.cdf).statistic <= 0.5 / m + 1e-12


def test_statistic_matches_scipy():
    x = np.random.default_rng(1).exponential(size=300)
    ours = ks_statistic(x, expcdf(1.0))
    ref = stats.kstest(x, "expon")
    assert ours.statistic == pytest.approx(ref.statistic, abs=1e-14)
    assert ours.pvalue == pytest.approx(ref.pvalue, abs=0.02)


def test_null_calibration():
    rng = np.random.default_rng(2)
    p = np.array([ks_statistic(rng.exponential(size=10**4), expcdf(1.0)).pvalue
                  for _ in range(300)])
    # about 1% rejections; 300 repetitions give sd 0.6%
    assert (p < 0.01).mean() < 0.035
    assert stats.kstest(p, "uniform").pvalue > 0.001


def test_power_against_wrong_rate():
    x = np.random.default_rng(3).exponential(scale=1 / 0.25, size=1000)
    assert ks_statistic(x, expcdf(0.5)).pvalue < 0.01


def test_two_sample_matches_scipy():
    rng = np.random.default_rng(4)
    x, y = rng.normal(size=400), rng.normal(0.1, 1, size=700)
    assert ks_two_sample(x, y).statistic == pytest.approx(stats.ks_2samp(x, y).statistic)
