"""Posterior of a Brownian motion with unknown drift.

The observation is ``X(t) = theta t + sigma W(t)`` with ``theta`` drawn from a
finite prior. The likelihood ratio of drift ``l`` against drift zero is
``exp(l X(t) / sigma^2 - l^2 t / (2 sigma^2))``, so the posterior at time
``t`` depends on the path only through ``X(t)``.

Two noise levels matter for the renewal systems: the naive
``sqrt(alpha) sigma_v`` suggested by the diffusion limit of the counting
process, and the correct ``sqrt(alpha) / sigma_f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import streams
from .errors import ConfigError, DomainError
from .posterior import PosteriorPath, normalize
from .streams import as_stream
from .system import Prior

__all__ = [
    "BrownianPosteriorSpec",
    "rn_density",
    "log_rn_density",
    "posterior_given_endpoint",
    "sample_posterior_marginal",
    "posterior_path_brownian",
    "LogOddsPaths",
    "simulate_log_odds",
    "CHUNK",
]

CHUNK = 256  # replications per random-number chunk in the vectorized samplers


@dataclass(frozen=True)
class BrownianPosteriorSpec:
    """Noise level, prior, horizon and grid step of a Brownian observation."""

    sigma: float
    prior: Prior
    horizon: float = 1.0
    grid_step: float | None = None

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ConfigError("sigma must be positive and finite")
        if not (self.horizon >= 0 and math.isfinite(self.horizon)):
            raise ConfigError("horizon must be nonnegative")
        if self.grid_step is not None and not self.grid_step > 0:
            raise ConfigError("grid step must be positive")

    @property
    def step(self) -> float:
        if self.grid_step is not None:
            return self.grid_step
        return self.horizon / 512 if self.horizon > 0 else 1.0


def log_rn_density(sigma: float, l, x, t):
    """``l x / sigma^2 - l^2 t / (2 sigma^2)``."""
    l = np.asarray(l, dtype=float)
    return (l / sigma**2) * x - 0.5 * (l / sigma) ** 2 * t


def rn_density(sigma: float, l, x, t):
    """Likelihood ratio of drift ``l`` against drift zero given ``X(t) = x``.

    >>> float(rn_density(2.0, 1.0, 0.0, 4.0)) == math.exp(-0.5)
    True
    """
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    out = np.exp(log_rn_density(sigma, l, x, t))
    return float(out) if np.ndim(out) == 0 else out


def posterior_given_endpoint(spec: BrownianPosteriorSpec, x, t) -> np.ndarray:
    """Posterior over the support given ``X(t) = x``.

    ``x`` may be an array; the result then has one row per entry. At
    ``t = 0`` the only possible endpoint is ``x = 0``.
    """
    if np.any(np.asarray(t) < 0):
        raise DomainError("t must be nonnegative")
    s = np.array(spec.prior.support)
    x = np.asarray(x, dtype=float)
    if np.any((np.asarray(t) == 0) & (x != 0)):
        raise DomainError("X(0) = 0, so x must be 0 at t = 0")
    lw = spec.prior.log_probs() + log_rn_density(spec.sigma, s, x[..., None], np.asarray(t, dtype=float)[..., None])
    return normalize(lw)


def sample_posterior_marginal(spec: BrownianPosteriorSpec, t: float, reps: int, rng) -> np.ndarray:
    """``reps`` draws of the posterior at time ``t``, shape ``(reps, k)``.

    Chunk ``c`` of :data:`CHUNK` replications draws ``theta`` and the Gaussian
    endpoint from ``rng.child(BROWNIAN, c)``. The draws do not depend on
    ``sigma``, so samplers at different noise levels share random numbers.
    """
    if reps < 1:
        raise DomainError("reps must be positive")
    st = as_stream(rng)
    s, p = spec.prior.as_arrays()
    cum = np.cumsum(p)
    out = []
    for c in range(-(-reps // CHUNK)):
        gen = st.child(streams.BROWNIAN, c).generator()
        u = gen.random(CHUNK)
        z = gen.standard_normal(CHUNK)
        theta = s[np.minimum(np.searchsorted(cum, u, side="right"), len(s) - 1)]
        x = theta * t + spec.sigma * math.sqrt(t) * z
        out.append(posterior_given_endpoint(spec, x, t))
    return np.vstack(out)[:reps]


def _grid(spec: BrownianPosteriorSpec) -> np.ndarray:
    T, d = spec.horizon, spec.step
    m = int(math.floor(T / d + 1e-9))
    g = np.arange(m + 1) * d
    if g[-1] < T:
        g = np.append(g, T)
    return g


def posterior_path_brownian(spec: BrownianPosteriorSpec, theta: float | None, rng) -> PosteriorPath:
    """Posterior path on the grid ``{0, d, 2d, ..., T}`` from exact Gaussian increments.

    ``theta=None`` draws the drift from the prior.
    """
    st = as_stream(rng)
    gen = st.generator()
    s, p = spec.prior.as_arrays()
    u = gen.random()
    if theta is None:
        theta = float(s[min(np.searchsorted(np.cumsum(p), u, side="right"), len(s) - 1)])
    g = _grid(spec)
    dt = np.diff(g)
    z = gen.standard_normal(len(dt))
    x = np.concatenate([[0.0], np.cumsum(theta * dt + spec.sigma * np.sqrt(dt) * z)])
    lphi = log_rn_density(spec.sigma, s[None, :], x[:, None], g[:, None])
    return PosteriorPath(
        grid=g,
        support=s,
        log_prior=spec.prior.log_probs(),
        log_phi=lphi,
        left_log_phi=lphi,
        arrival=np.zeros(len(g), dtype=bool),
        prior_probs=p,
    )


@dataclass(frozen=True)
class LogOddsPaths:
    """A chunk of two-hypothesis log-odds paths with per-interval bridge extrema.

    ``y[i, j]`` is ``log(pi_1 / pi_0)`` at ``grid[j]``; ``lo[i, j]`` and
    ``hi[i, j]`` are the minimum and maximum of the Brownian bridge between
    ``grid[j]`` and ``grid[j+1]``.
    """

    grid: np.ndarray
    y: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    theta: np.ndarray


def simulate_log_odds(spec: BrownianPosteriorSpec, chunk: int, rng, size: int = CHUNK) -> LogOddsPaths:
    """Simulate chunk ``chunk`` of log-odds paths for a two-point prior.

    With support ``{l0, l1}`` the log-odds
    ``Y = log(p1/p0) + (l1 - l0) X / sigma^2 - (l1^2 - l0^2) t / (2 sigma^2)``
    is a Brownian motion with volatility ``|l1 - l0| / sigma``. Bridge
    extrema between grid points are sampled exactly given the endpoints, so
    exits through a barrier are detected without discretization misses.
    """
    if spec.prior.size != 2:
        raise DomainError("log-odds paths need a two-point prior")
    st = as_stream(rng)
    gen = st.child(streams.BROWNIAN_PATHS, chunk).generator()
    bgen = st.child(streams.BRIDGE, chunk).generator()
    (l0, l1), (p0, p1) = spec.prior.as_arrays()
    g = _grid(spec)
    dt = np.diff(g)
    theta = np.where(gen.random(size) < p0, l0, l1)
    z = gen.standard_normal((size, len(dt)))
    sig = spec.sigma
    dx = theta[:, None] * dt + sig * np.sqrt(dt) * z
    x = np.concatenate([np.zeros((size, 1)), np.cumsum(dx, axis=1)], axis=1)
    with np.errstate(divide="ignore"):
        y0 = math.log(p1) - math.log(p0)
    y = y0 + ((l1 - l0) / sig**2) * x - (0.5 * (l1 * l1 - l0 * l0) / sig**2) * g
    gamma2 = ((l1 - l0) / sig) ** 2
    a, b = y[:, :-1], y[:, 1:]
    d2 = (b - a) ** 2
    e1 = -2.0 * gamma2 * dt * np.log1p(-bgen.random((size, len(dt))))
    e2 = -2.0 * gamma2 * dt * np.log1p(-bgen.random((size, len(dt))))
    lo = 0.5 * (a + b - np.sqrt(d2 + e1))
    hi = 0.5 * (a + b + np.sqrt(d2 + e2))
    return LogOddsPaths(grid=g, y=y, lo=lo, hi=hi, theta=theta)
