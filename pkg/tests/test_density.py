import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from renewal_bayes.analysis import ks_two_sample
from renewal_bayes.density import (
    Gamma,
    LogNormal,
    MaxwellBoltzmann,
    Rayleigh,
    TruncatedCubic,
    Weibull,
    compute_functionals,
    density_from_config,
    expect,
    sample_residual_first,
    verify_lemma_r,
)
from renewal_bayes.errors import ConfigError, DegenerateConditioningError, DomainError

GRID = [
    Gamma(0.5), Gamma(1.0), Gamma(2.0), Gamma(4.0),
    Weibull(0.5), Weibull(1.0), Weibull(2.0), Weibull(3.0),
    LogNormal(0.5), LogNormal(1.0), LogNormal(1.5),
    Rayleigh(), MaxwellBoltzmann(),
]


def scipy_law(m):
    """Independent mean-one parametrization via scipy.stats."""
    if isinstance(m, Gamma):
        return stats.gamma(m.shape, scale=1.0 / m.shape)
    if isinstance(m, Weibull):
        return stats.weibull_min(m.shape, scale=1.0 / math.gamma(1.0 + 1.0 / m.shape))
    if isinstance(m, LogNormal):
        return stats.lognorm(m.s, scale=math.exp(-m.s**2 / 2))
    if isinstance(m, Rayleigh):
        return stats.rayleigh(scale=math.sqrt(2.0 / math.pi))
    if isinstance(m, MaxwellBoltzmann):
        return stats.maxwell(scale=math.sqrt(math.pi / 8.0))
    raise TypeError(m)


@pytest.mark.parametrize("m", GRID, ids=str)
def test_pdf_cdf_agree_with_scipy(m):
    law = scipy_law(m)
    x = np.array([0.05, 0.3, 1.0, 2.5, 7.0])
    np.testing.assert_allclose(m.pdf(x), law.pdf(x), rtol=1e-11)
    np.testing.assert_allclose(m.cdf(x), law.cdf(x), rtol=1e-11)
    np.testing.assert_allclose(m.survival(x), law.sf(x), rtol=1e-10)
    assert abs(law.mean() - 1.0) < 1e-12


@pytest.mark.parametrize("m", GRID, ids=str)
def test_mass_and_mean(m):
    f = compute_functionals(m)
    assert abs(f.mass - 1) < 1e-9
    assert abs(f.mean - 1) < 1e-9


@pytest.mark.parametrize("m", GRID, ids=str)
def test_sigma_v_matches_scipy_sd(m):
    assert compute_functionals(m).sigma_v == pytest.approx(scipy_law(m).std(), rel=1e-9)


@pytest.mark.parametrize("m", GRID, ids=str)
def test_sigma_f_by_independent_quadrature(m):
    law = scipy_law(m)
    h = 1e-6

    def score(x):  # x f'(x)/f(x) from a central difference of the scipy log-pdf
        return x * (law.logpdf(x + h * x) - law.logpdf(x - h * x)) / (2 * h * x)

    hi = law.isf(1e-16)
    s1 = integrate.quad(lambda x: score(x) * law.pdf(x), 0, hi, limit=400, points=[1.0])[0]
    s2 = integrate.quad(lambda x: score(x) ** 2 * law.pdf(x), 0, hi, limit=400, points=[1.0])[0]
    assert compute_functionals(m).sigma_f == pytest.approx(math.sqrt(s2 - s1 * s1), rel=1e-5)


@pytest.mark.parametrize("m", GRID, ids=str)
@pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 2.0, 10.0])
def test_score_matches_finite_differences(m, x):
    h = 1e-5
    fd = (m.logpdf(x * (1 + h)) - m.logpdf(x * (1 - h))) / (2 * h)
    assert m.score_x(x) == pytest.approx(fd, rel=1e-5, abs=1e-8)


@given(beta=st.floats(0.2, 8.0), x=st.floats(0.01, 20.0))
def test_gamma_score_closed_form(beta, x):
    assert Gamma(beta).score_x(x) == pytest.approx((beta - 1) - beta * x, rel=1e-12, abs=1e-12)


@given(s=st.floats(0.2, 2.0), x=st.floats(0.01, 20.0))
def test_lognormal_score_closed_form(s, x):
    expected = -1 - (math.log(x) + s * s / 2) / (s * s)
    assert LogNormal(s).score_x(x) == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_exponential_score_at_one():
    assert Gamma(1.0).score_x(1.0) == -1.0


def test_curvature_matches_finite_differences():
    for m in (Gamma(2.0), Weibull(3.0), LogNormal(1.0), MaxwellBoltzmann()):
        for x in (0.3, 1.0, 3.0):
            h = 1e-5 * x
            d = (m.score_x(x + h) / (x + h) - m.score_x(x - h) / (x - h)) / (2 * h)
            assert m.curvature_x2(x) == pytest.approx(d * x * x, rel=1e-5, abs=1e-7)


def test_functional_examples():
    f = compute_functionals(Gamma(4.0))
    assert f.sigma_v == pytest.approx(0.5, abs=1e-9)
    assert f.sigma_f == pytest.approx(2.0, abs=1e-9)
    assert f.product == pytest.approx(1.0, abs=1e-9)
    f = compute_functionals(Gamma(1.0))
    assert (f.sigma_v, f.sigma_f, f.sigma_prime) == pytest.approx((1, 1, 1), abs=1e-9)
    f = compute_functionals(LogNormal(1.5))
    assert f.sigma_f == pytest.approx(1 / 1.5, abs=1e-9)
    assert f.sigma_v == pytest.approx(math.sqrt(math.exp(2.25) - 1), abs=1e-9)
    assert f.product == pytest.approx(1.9422, abs=1e-3)
    assert compute_functionals(Weibull(0.5)).product == pytest.approx(math.sqrt(1.25), abs=1e-7)


def test_sigma_prime_scales_with_alpha():
    f = compute_functionals(LogNormal(1.0), alpha=4.0)
    assert f.sigma_prime == pytest.approx(2.0 / f.sigma_f)
    with pytest.raises(DomainError):
        compute_functionals(Gamma(1.0), alpha=0.0)


@pytest.mark.parametrize(
    "m, triple",
    [(Gamma(2.0), (-1, -1, -2)), (Gamma(1.0), (-1, 0, -2)), (Weibull(2.0), (-1, -3, -2))],
    ids=str,
)
def test_lemma_r_examples(m, triple):
    rep = verify_lemma_r(m)
    assert (rep.mean_score, rep.mean_curvature, rep.mean_score_v) == pytest.approx(triple, abs=1e-7)


@pytest.mark.parametrize("m", GRID, ids=str)
def test_lemma_r_identities(m):
    r1, r2, r3 = verify_lemma_r(m).residuals
    assert abs(r1) < 1e-7 and abs(r2) < 1e-7 and abs(r3) < 1e-7


@settings(max_examples=15, deadline=None)
@given(beta=st.floats(0.3, 6.0))
def test_gamma_equality_case(beta):
    assert abs(compute_functionals(Gamma(beta)).product - 1) < 1e-7


@settings(max_examples=15, deadline=None)
@given(
    m=st.one_of(
        st.floats(0.4, 5.0).map(Weibull),
        st.floats(0.2, 1.8).map(LogNormal),
    )
)
def test_product_at_least_one(m):
    assert compute_functionals(m).product >= 1 - 1e-9


def test_domain_errors():
    with pytest.raises(DomainError):
        Gamma(1.0).pdf(0.0)
    with pytest.raises(DomainError):
        LogNormal(1.0).score_x(-1.0)
    with pytest.raises(DomainError):
        Gamma(-1.0)
    with pytest.raises(DomainError):
        TruncatedCubic(2.0)
    with pytest.raises(DomainError):
        TruncatedCubic(1e13)


@pytest.mark.parametrize("m", GRID + [TruncatedCubic(50.0)], ids=str)
def test_sample_mean_is_one(m):
    x = m.sample(np.random.default_rng(3), 40000)
    se = compute_functionals(m).sigma_v / math.sqrt(len(x))
    assert abs(x.mean() - 1) < 4 * se
    assert np.all(x > 0)


# -- truncated cubic ----------------------------------------------------------------
@pytest.mark.parametrize("y", [8.0, 100.0, 1e6, 1e12])
def test_truncated_cubic_is_a_mean_one_density(y):
    m = TruncatedCubic(y)
    f = compute_functionals(m)
    assert abs(f.mass - 1) < 1e-9 and abs(f.mean - 1) < 1e-9
    x = np.geomspace(1e-3, 10 * y, 400)
    assert np.all(np.isfinite(m.logpdf(x)))
    assert np.all(np.diff(m.cdf(x)) >= -1e-15)
    np.testing.assert_allclose(m.cdf(x) + m.survival(x), 1.0, atol=1e-13)


def test_truncated_cubic_cdf_integrates_pdf():
    m = TruncatedCubic(30.0)
    for a, b in [(0.1, 0.7), (2.0, 29.5), (29.0, 33.0), (31.0, 60.0)]:
        q = integrate.quad(lambda x: float(m.pdf(x)), a, b, epsabs=1e-13, limit=200)[0]
        assert m.cdf(b) - m.cdf(a) == pytest.approx(q, rel=1e-8, abs=1e-13)


def test_truncated_cubic_score_continuous_across_glue():
    m = TruncatedCubic(20.0)
    # a jump would not shrink with the step
    coarse = np.max(np.abs(np.diff(m.score_x(np.linspace(19.0, 22.0, 3001)))))
    fine = np.max(np.abs(np.diff(m.score_x(np.linspace(19.0, 22.0, 30001)))))
    assert fine < coarse / 8


def test_sigma_gap_grows_with_cutoff():
    gaps = []
    for y in (10.0, 1e3, 1e6):
        f = compute_functionals(TruncatedCubic(y))
        gaps.append(f.sigma_v - 1 / f.sigma_f)
    assert gaps[0] < gaps[1] < gaps[2]


# -- residual first interarrival ----------------------------------------------------
def test_residual_without_conditioning_is_scaled_base():
    m = LogNormal(1.0)
    a = sample_residual_first(m, 2.0, 0.0, np.random.default_rng(1), 10000)
    b = m.sample(np.random.default_rng(2), 10000) / 2.0
    assert ks_two_sample(a, b).statistic < 0.02


def test_residual_exponential_memoryless():
    a = sample_residual_first(Gamma(1.0), 1.0, 3.0, np.random.default_rng(5), 10000)
    # rejection oracle: condition raw exponentials on exceeding 3
    raw = np.random.default_rng(6).exponential(size=400000)
    b = raw[raw >= 3.0][:10000] - 3.0
    assert len(b) == 10000
    assert ks_two_sample(a, b).statistic < 0.02


def test_residual_weibull_conditional_mean():
    law = scipy_law(Weibull(2.0))
    oracle = integrate.quad(lambda x: (x - 1.0) * law.pdf(x), 1.0, np.inf)[0] / law.sf(1.0)
    a = sample_residual_first(Weibull(2.0), 1.0, 1.0, np.random.default_rng(7), 20000)
    assert abs(a.mean() - oracle) < 4 * a.std() / math.sqrt(len(a))


def test_residual_inverts_conditional_survival():
    m = Weibull(0.5)
    mu, t_v = 1.3, 0.8
    a = sample_residual_first(m, mu, t_v, np.random.default_rng(9), 5000)
    # probability-integral transform must be uniform
    u = np.exp(m.logsf(mu * (a + t_v)) - m.logsf(mu * t_v))
    grid = np.sort(u)
    assert np.max(np.abs(grid - (np.arange(1, 5001) - 0.5) / 5000)) < 0.025


def test_residual_degenerate_conditioning():
    with pytest.raises(DegenerateConditioningError):
        sample_residual_first(Gamma(1.0), 1.0, 1e4, np.random.default_rng(0))
    with pytest.raises(DomainError):
        sample_residual_first(Gamma(1.0), -1.0, 1.0, np.random.default_rng(0))


# -- configuration ------------------------------------------------------------------
@pytest.mark.parametrize("m", GRID + [TruncatedCubic(12.0)], ids=str)
def test_config_round_trip(m):
    assert density_from_config(m.to_config()) == m


def test_config_errors():
    with pytest.raises(ConfigError):
        density_from_config({"family": "cauchy"})
    with pytest.raises(ConfigError):
        density_from_config({"family": "gamma"})
    with pytest.raises(ConfigError):
        density_from_config({"family": "gamma", "shape": 1.0, "scale": 2.0})
    with pytest.raises(ConfigError):
        density_from_config({"family": "gamma", "shape": -2.0})


def test_expect_matches_scipy_moment():
    m = Weibull(3.0)
    assert expect(m, lambda x: x**3) == pytest.approx(scipy_law(m).moment(3), rel=1e-10)
