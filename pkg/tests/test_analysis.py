import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from renewal_bayes.analysis import (
    convergence_table,
    decreasing_within_noise,
    ks_fluctuation,
    ks_two_sample,
    ks_vs_normal,
    martingale_check,
)
from renewal_bayes.errors import DomainError


def test_identical_samples_have_zero_distance():
    x = np.random.default_rng(0).normal(size=500)
    assert ks_two_sample(x, x.copy()).statistic == 0.0


def test_disjoint_half_shift():
    x = np.linspace(0, 1, 1000, endpoint=False)
    assert ks_two_sample(x, x + 0.5).statistic == pytest.approx(0.5, abs=2e-3)


def test_same_law_below_fluctuation():
    rng = np.random.default_rng(1)
    r = ks_two_sample(rng.normal(size=5000), rng.normal(size=5000))
    assert r.statistic < 0.027
    assert r.critical_005 == pytest.approx(ks_fluctuation(5000))


def test_normal_shift_distance():
    # sup |Phi(x) - Phi(x - 1)| = 2 Phi(1/2) - 1
    x = np.random.default_rng(2).normal(size=10**5) + 1.0
    assert ks_vs_normal(x).statistic == pytest.approx(0.3829, abs=0.006)
    assert 2 * stats.norm.cdf(0.5) - 1 == pytest.approx(0.3829, abs=1e-4)


def test_standard_normal_not_rejected():
    r = ks_vs_normal(np.random.default_rng(3).normal(size=4000))
    assert not r.reject_at_005


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), m=st.integers(5, 80), k=st.integers(5, 80))
def test_two_sample_matches_scipy(seed, m, k):
    rng = np.random.default_rng(seed)
    x = np.round(rng.normal(size=m), 1)  # rounding forces ties
    y = np.round(rng.normal(0.2, size=k), 1)
    assert ks_two_sample(x, y).statistic == pytest.approx(stats.ks_2samp(x, y).statistic, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_one_sample_matches_scipy(seed):
    x = np.random.default_rng(seed).standard_t(5, size=200)
    assert ks_vs_normal(x).statistic == pytest.approx(stats.kstest(x, "norm").statistic, abs=1e-12)


def test_invariant_under_monotone_maps():
    rng = np.random.default_rng(4)
    x, y = rng.normal(size=300), rng.normal(0.3, size=400)
    d = ks_two_sample(x, y).statistic
    assert ks_two_sample(np.exp(x), np.exp(y)).statistic == d
    assert ks_two_sample(x**3, y**3).statistic == d


def test_bad_samples():
    with pytest.raises(DomainError):
        ks_two_sample([], [1.0])
    with pytest.raises(DomainError):
        ks_vs_normal([0.0, math.nan])


def test_martingale_check_cases():
    rng = np.random.default_rng(5)
    assert martingale_check(rng.normal(0.6, 0.1, 4000), 0.6).passed
    assert not martingale_check(rng.normal(0.65, 0.1, 4000), 0.6).passed
    assert martingale_check(np.full(10, 0.3), 0.3).passed
    c = martingale_check(np.full(10, 0.3), 0.31)
    assert not c.passed and math.isinf(c.z)


def test_convergence_table():
    rng = np.random.default_rng(6)
    ref = {"a": rng.normal(size=2000)}
    rows = convergence_table(lambda n: rng.normal(1.0 / n, size=2000), [1, 10, 100], ref)
    assert [r.n for r in rows] == [1, 10, 100]
    assert rows[0].distances["a"] > rows[-1].distances["a"]
    with pytest.raises(DomainError):
        convergence_table(lambda n: ref["a"], [10, 10], ref)
    with pytest.raises(DomainError):
        convergence_table(lambda n: ref["a"], [100, 10], ref)


def test_decreasing_within_noise():
    assert decreasing_within_noise([0.3, 0.2, 0.1], 0.01)
    assert decreasing_within_noise([0.3, 0.2, 0.205, 0.1], 0.01)
    assert not decreasing_within_noise([0.3, 0.2, 0.25], 0.01)
    assert not decreasing_within_noise([0.3, 0.301, 0.302], 0.01)
