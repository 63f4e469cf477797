import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from renewal_bayes.brownian import BrownianPosteriorSpec
from renewal_bayes.density import Gamma, LogNormal
from renewal_bayes.errors import ConfigError
from renewal_bayes.posterior import PosteriorPath
from renewal_bayes.stopping import (
    Bandit,
    ContinuationRegion,
    General,
    SeqTest,
    StoppingSpec,
    first_exit,
    payoff_from_path,
    search_cutoff_bandit,
    search_interval_seqtest,
    suboptimality_gap,
    value_limit,
    value_n,
    value_n_raw_bandit,
)
from renewal_bayes.streams import Stream
from renewal_bayes.system import Prior, SystemSpec

BANDIT = Bandit(1.0, -1.0)  # support {0, 2}


def bspec(sigma, T=8.0, step=None):
    return BrownianPosteriorSpec(sigma, Prior([0.0, 2.0]), T, step if step is not None else T / 4096)


def cutoff_value_oracle(sigma, pbar, pi, r=1.0, c0=1.0, cl=-1.0, l=2.0):
    """Infinite-horizon value of the cut-off rule (pbar, 1] for k(pi) = cl pi + c0 (1 - pi), K = 0."""
    gamma = l / sigma
    mu = 0.5 * (-1.0 + math.sqrt(1.0 + 8.0 * r / gamma**2))
    k = lambda p: cl * p + c0 * (1.0 - p)
    h = lambda p: (1.0 - p) ** (1.0 + mu) * p ** (-mu)
    if pi <= pbar:
        return 0.0
    return k(pi) - k(pbar) * h(pi) / h(pbar)


def path_from_log_odds(t, y, support=(0.0, 1.0), left=None):
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    yl = y if left is None else np.asarray(left, dtype=float)
    lp = np.stack([np.zeros_like(y), y], axis=1)
    ll = np.stack([np.zeros_like(yl), yl], axis=1)
    return PosteriorPath(t, np.array(support), np.log([0.5, 0.5]), lp, ll, np.zeros(len(t), bool))


# -- regions and costs --------------------------------------------------------------
def test_region_parsing():
    r = ContinuationRegion.parse("(0.1, 0.3) U (0.5, 1]")
    assert str(r) == "(0.1, 0.3) U (0.5, 1]"
    assert list(r.contains([0.05, 0.2, 0.3, 0.4, 0.7, 1 - 1e-12])) == [False, True, False, False, True, True]
    assert str(ContinuationRegion.cutoff(0.3)) == "(0.3, 1]"
    assert str(ContinuationRegion.interval(0.2, 0.8)) == "(0.2, 0.8)"
    assert ContinuationRegion.interval(0.6, 0.4).intervals == ()
    for bad in ["(0.1, 0.3) U (0.3, 0.5)", "(0.5, 0.2)", "[0.2, 0.5)", "(0.1, 1.5)", "0.1-0.3"]:
        with pytest.raises(ConfigError):
            ContinuationRegion.parse(bad)


@given(a=st.floats(0.01, 0.45), w=st.floats(0.01, 0.5), p=st.floats(0.001, 0.999))
def test_region_membership_matches_interval(a, w, p):
    b = min(a + w, 0.99)
    r = ContinuationRegion.interval(a, b)
    assert bool(r.contains(p)) == (a < p < b)


def test_cost_validation():
    with pytest.raises(ConfigError):
        Bandit(-1.0, 1.0)
    with pytest.raises(ConfigError):
        SeqTest(0.0, 1.0, 1.0)
    with pytest.raises(ConfigError):
        General([0.0, 0.5], [1, 1], [0, 0])
    with pytest.raises(ConfigError):
        BANDIT.check_support([0.0, 1.0])
    with pytest.raises(ConfigError):
        StoppingSpec(1.0, BANDIT, ContinuationRegion.cutoff(0.3), 1.0)


def test_bandit_n_side_cost_is_exact():
    pi = np.linspace(0, 1, 11)
    np.testing.assert_allclose(BANDIT.k_n(pi, [0.0, 2.0]), BANDIT.k(pi), rtol=0, atol=1e-15)
    sq = SeqTest(2.0, 3.0, 0.5)
    np.testing.assert_allclose(sq.K_n(pi, 100), 100 * sq.K(pi))


# -- exits -------------------------------------------------------------------------
def test_first_exit_examples():
    t = np.linspace(0, 1, 11)
    # start outside
    ex = first_exit(path_from_log_odds(t, np.zeros(11)), ContinuationRegion.cutoff(0.6))
    assert ex.time == 0.0 and ex.kind == "initial"
    # (0, 1] never exits when pi stays positive
    ex = first_exit(path_from_log_odds(t, np.linspace(0, -30, 11)), ContinuationRegion.parse("(0, 1]"))
    assert ex.time is None
    # constant inside
    ex = first_exit(path_from_log_odds(t, np.zeros(11)), ContinuationRegion.interval(0.2, 0.8))
    assert ex.time is None


def test_drift_exit_is_interpolated():
    t = np.linspace(0, 1, 11)
    y = -2.0 * t  # crosses logit(0.3) = -0.8473 at t = 0.4236
    ex = first_exit(path_from_log_odds(t, y), ContinuationRegion.cutoff(0.3))
    assert ex.kind == "drift"
    assert ex.time == pytest.approx(-math.log(0.3 / 0.7) / 2.0, rel=1e-12)


def test_jump_exit_at_arrival():
    t = np.array([0.0, 0.2, 0.4, 0.6])
    y = np.array([0.0, 0.1, -3.0, -3.0])
    left = np.array([0.0, 0.1, 0.2, -3.0])
    ex = first_exit(path_from_log_odds(t, y, left=left), ContinuationRegion.cutoff(0.3))
    assert ex.kind == "jump" and ex.time == 0.4


def test_payoff_of_constant_cost():
    t = np.linspace(0, 2, 2001)
    y = -t
    stop = StoppingSpec(1.5, General.constant(-1.0, 0.0), ContinuationRegion.cutoff(0.3), 0.5)
    pay, ex = payoff_from_path(path_from_log_odds(t, y), stop.region, stop)
    tau = -math.log(0.3 / 0.7)
    assert ex.time == pytest.approx(tau, rel=1e-12)
    assert pay == pytest.approx(-(1 - math.exp(-1.5 * tau)), rel=1e-6)


# -- values -------------------------------------------------------------------------
def gamma_spec(n, T=8.0, density=None):
    return SystemSpec(n, 1.0, Prior([0.0, 2.0]), density or Gamma(1.0), T)


def test_zero_costs_give_zero():
    stop = StoppingSpec(1.0, General.constant(0.0, 0.0), ContinuationRegion.cutoff(0.3), 0.5)
    assert value_n(gamma_spec(100, T=2.0), stop, 50, Stream(1)).value_mean == 0.0
    assert value_limit(bspec(1.0, T=2.0), stop, 50, Stream(1)).value_mean == 0.0


def test_immediate_stop_values():
    sq = StoppingSpec(2.0, SeqTest(1.0, 1.0, 0.3), ContinuationRegion.interval(0.6, 0.9), 0.5)
    v = value_n(gamma_spec(400, T=2.0), sq, 20, Stream(2))
    assert v.value_mean == pytest.approx(2.0 * 0.5)  # (r/n) n K(pi0)
    assert v.value_stderr == 0.0
    lim = StoppingSpec(1.0, SeqTest(1.0, 1.0, 0.0), ContinuationRegion.interval(0.6, 0.9), 0.5)
    assert value_limit(bspec(1.0), lim, 20, Stream(3)).value_mean == pytest.approx(0.5)
    b = StoppingSpec(1.0, BANDIT, ContinuationRegion.cutoff(0.5), 0.5)
    assert value_limit(bspec(1.0), b, 20, Stream(4)).value_mean == 0.0


def test_never_exit_value():
    T = 3.0
    stop = StoppingSpec(1.0, General.constant(-1.0, 0.0), ContinuationRegion.parse("[0, 1]"), 0.5)
    v = value_limit(bspec(1.0, T=T), stop, 64, Stream(5))
    assert v.value_mean == pytest.approx(-(1 - math.exp(-T)), rel=1e-6)
    assert v.frac_never_stopped_by_T == 1.0
    assert v.tail_bound == pytest.approx(math.exp(-T))


@pytest.mark.parametrize("sigma, pbar", [(1.0, 0.3), (1.5, 0.2), (2.0, 0.45)])
def test_value_limit_matches_closed_form(sigma, pbar):
    stop = StoppingSpec(1.0, BANDIT, ContinuationRegion.cutoff(pbar), 0.5)
    v = value_limit(bspec(sigma), stop, 4000, Stream(6))
    oracle = cutoff_value_oracle(sigma, pbar, 0.5)
    assert abs(v.value_mean - oracle) < 3 * v.value_stderr + v.tail_bound + 2e-3


def test_cutoff_curve_matches_closed_form():
    grid = [0.1, 0.2, 0.3, 0.4]
    stop = StoppingSpec(1.0, BANDIT, ContinuationRegion.cutoff(0.3), 0.5)
    s = search_cutoff_bandit(bspec(1.5), stop, grid, 4000, Stream(7))
    for p, v, se in zip(grid, s.values, s.stderr):
        assert abs(v - cutoff_value_oracle(1.5, p, 0.5)) < 3 * se + 3e-3


def test_search_agrees_with_value_limit():
    grid = [0.2, 0.3, 0.4]
    stop = StoppingSpec(1.0, BANDIT, ContinuationRegion.cutoff(0.3), 0.5)
    s = search_cutoff_bandit(bspec(1.0), stop, grid, 512, Stream(8))
    v = value_limit(bspec(1.0), stop, 512, Stream(8))
    assert s.values[1] == pytest.approx(v.value_mean, rel=1e-12)


def test_optimal_cutoff_near_oracle():
    sigma = 1.5
    gamma = 2.0 / sigma
    mu = 0.5 * (-1 + math.sqrt(1 + 8 / gamma**2))
    grid = np.round(np.arange(1, 25) * 0.02, 10)
    stop = StoppingSpec(1.0, BANDIT, ContinuationRegion.cutoff(0.3), 0.5)
    s = search_cutoff_bandit(bspec(sigma), stop, grid, 6000, Stream(9))
    assert abs(s.p_star - mu / (1 + 2 * mu)) <= 0.06
    # common random numbers keep the curve smooth: no kinks beyond noise
    assert np.max(np.abs(np.diff(s.values, 2))) < 3 * np.max(s.stderr)


def test_degenerate_bandits():
    grid = [0.0, 0.2, 0.4, 0.6, 0.8]
    neg = StoppingSpec(1.0, General.constant(-1.0), ContinuationRegion.cutoff(0.3), 0.5)
    s = search_cutoff_bandit(bspec(1.0, T=4.0), neg, grid, 512, Stream(10))
    assert s.p_star == 0.0
    assert s.values[0] == pytest.approx(-(1 - math.exp(-4.0)), rel=1e-6)
    pos = StoppingSpec(1.0, General.constant(1.0), ContinuationRegion.cutoff(0.3), 0.5)
    s = search_cutoff_bandit(bspec(1.0, T=4.0), pos, grid, 512, Stream(10))
    assert s.values.min() == 0.0
    assert s.p_star >= 0.5


def test_symmetric_bandit_cutoff_near_half():
    grid = np.round(np.arange(1, 50) * 0.02, 10)
    stop = StoppingSpec(1.0, BANDIT, ContinuationRegion.cutoff(0.3), 0.5)
    s = search_cutoff_bandit(bspec(10.0), stop, grid, 4000, Stream(11))
    assert abs(s.p_star - 0.5) <= 0.15


def test_seqtest_searches():
    q1 = [0.1, 0.2, 0.3, 0.4, 0.5]
    q2 = [0.5, 0.6, 0.7, 0.8, 0.9]
    costly = StoppingSpec(1.0, SeqTest(1.0, 1.0, 100.0), ContinuationRegion.interval(0.2, 0.8), 0.5)
    s = search_interval_seqtest(bspec(1.0, T=4.0), costly, q1, q2, 512, Stream(12))
    assert s.values.min() == pytest.approx(0.5)
    free = StoppingSpec(1.0, SeqTest(1.0, 1.0, 0.0), ContinuationRegion.interval(0.2, 0.8), 0.5)
    s = search_interval_seqtest(bspec(1.0, T=4.0), free, q1, q2, 2000, Stream(13))
    widest = s.values[0, -1]
    assert widest <= s.values.min() + 2 * s.stderr[0, -1]
    q1 = [round(0.04 * i, 10) for i in range(1, 13)]
    q2 = [round(1 - x, 10) for x in q1]
    mid = StoppingSpec(1.0, SeqTest(1.0, 1.0, 1.0), ContinuationRegion.interval(0.2, 0.8), 0.5)
    s = search_interval_seqtest(bspec(1.0), mid, q1, q2, 3000, Stream(14))
    assert abs(s.q1_star + s.q2_star - 1.0) <= 0.1


def test_value_bounds_and_discount_scaling():
    T = 4.0
    for c in (-1.0, -0.3):
        vals = []
        for r in (0.5, 1.0, 2.0):
            stop = StoppingSpec(r, General.constant(c), ContinuationRegion.cutoff(0.3), 0.5)
            v = value_limit(bspec(1.0, T=T), stop, 512, Stream(15))
            assert abs(v.value_mean) <= abs(c) + 1e-12
            vals.append(abs(v.value_mean) / r)
        # with the r e^{-rt} weighting the undiscounted mass grows with r; per unit of r it shrinks
        assert vals[0] >= vals[1] >= vals[2]


def test_value_n_matches_limit_for_exponential():
    stop = StoppingSpec(1.0, BANDIT, ContinuationRegion.cutoff(0.3), 0.5)
    vn = value_n(gamma_spec(10**4), stop, 1200, Stream(16))
    vl = value_limit(bspec(1.0), stop, 4000, Stream(17))
    assert abs(vn.value_mean - vl.value_mean) < 3 * math.hypot(vn.value_stderr, vl.value_stderr)


def test_raw_increment_cross_check():
    stop = StoppingSpec(1.0, BANDIT, ContinuationRegion.cutoff(0.3), 0.5)
    post, raw = value_n_raw_bandit(gamma_spec(2000, T=4.0), stop, 600, Stream(18))
    d = raw.payoffs - post.payoffs
    assert abs(d.mean()) < 4 * d.std(ddof=1) / math.sqrt(len(d))


def test_gap_vanishes_for_gamma():
    spec = gamma_spec(400, T=4.0)
    stop = StoppingSpec(1.0, BANDIT, ContinuationRegion.cutoff(0.3), 0.5)
    rep = suboptimality_gap(spec, stop, 60, Stream(19), grid=[0.2, 0.3, 0.4], search_reps=512)
    assert rep.p_star_f == rep.p_star_v
    assert rep.gap == 0.0


def test_threads_do_not_change_values():
    spec = gamma_spec(300, T=2.0, density=LogNormal(1.0))
    stop = StoppingSpec(1.0, BANDIT, ContinuationRegion.cutoff(0.3), 0.5)
    a = value_n(spec, stop, 40, Stream(20), threads=1)
    b = value_n(spec, stop, 40, Stream(20), threads=4)
    assert np.array_equal(a.payoffs, b.payoffs)
