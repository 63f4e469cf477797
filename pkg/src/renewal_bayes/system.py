"""The n-th random-parameter renewal system.

A system is indexed by ``n``. Its unknown parameter ``theta`` is drawn from a
finite prior on a support ``S``, and given ``theta = l`` the interarrival times
are ``v_i / mu_l`` with ``mu_l = alpha + l / sqrt(n)``. All hypotheses are
coupled on one probability space: a single sequence of base draws ``V_i`` with
the mean-one law is rescaled by ``1/mu_l``, so two paths with different
parameters differ only by a time change.

Time conventions: an :class:`ArrivalPath` stores *working-time* epochs in
unscaled units, i.e. in ``[0, n T]``. The scaled time ``t`` of the decision
maker corresponds to unscaled time ``n t``. For an intermittent system with
busy fraction ``rho`` the decision maker's clock runs ``1/rho`` times faster
than working time; :func:`apply_busy_time` attaches that clock to a path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import streams
from .density import DensityModel, compute_functionals, sample_residual_first
from .errors import ConfigError, DomainError
from .streams import Stream, as_stream, replicate

__all__ = [
    "Prior",
    "SystemSpec",
    "ArrivalPath",
    "rates",
    "simulate_path",
    "scaled_observed",
    "apply_busy_time",
    "score_walk",
    "sample_score_walk",
    "BLOCK",
]

BLOCK = 8192  # base draws are generated in blocks of this fixed size

# sub-stream keys inside one replication
SUB_THETA = 0
SUB_BASE = 1
SUB_RESIDUAL = 2


@dataclass(frozen=True)
class Prior:
    """Finite prior ``P(theta = support[i]) = probs[i]`` on distinct sorted points."""

    support: tuple
    probs: tuple

    def __init__(self, support: Sequence[float], probs: Sequence[float] | None = None):
        s = [float(x) for x in support]
        if len(s) == 0:
            raise ConfigError("prior support must be nonempty")
        if probs is None:
            p = [1.0 / len(s)] * len(s)
        else:
            p = [float(x) for x in probs]
        if len(p) != len(s):
            raise ConfigError("prior support and probs differ in length")
        if any(not math.isfinite(x) for x in s):
            raise ConfigError("prior support must be finite")
        if len(set(s)) != len(s):
            raise ConfigError("prior support points must be distinct")
        if any(not (x >= 0) for x in p):
            raise ConfigError("prior probabilities must be nonnegative")
        if abs(math.fsum(p) - 1.0) > 1e-12:
            raise ConfigError("prior probabilities must sum to 1")
        order = sorted(range(len(s)), key=lambda i: s[i])
        object.__setattr__(self, "support", tuple(s[i] for i in order))
        object.__setattr__(self, "probs", tuple(p[i] for i in order))

    @classmethod
    def point(cls, value: float) -> "Prior":
        return cls([value], [1.0])

    @property
    def size(self) -> int:
        return len(self.support)

    def as_arrays(self):
        return np.array(self.support), np.array(self.probs)

    def log_probs(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(np.array(self.probs))

    def draw_index(self, rng: np.random.Generator) -> int:
        """Index of a draw from the prior (inverse cdf of one uniform)."""
        u = rng.random()
        cum = np.cumsum(self.probs)
        return int(min(np.searchsorted(cum, u, side="right"), self.size - 1))

    def to_config(self) -> dict:
        return {"support": list(self.support), "probs": list(self.probs)}


@dataclass(frozen=True)
class SystemSpec:
    """Parameters of the n-th system.

    Parameters
    ----------
    n : int
        System index; time is scaled by ``n`` and rates by ``1/sqrt(n)``.
    alpha : float
        Rate of the reference hypothesis ``l = 0``.
    prior : Prior
        Prior of ``theta``.
    density : DensityModel
        Mean-one interarrival law.
    horizon : float
        Scaled horizon ``T``.
    t_u : float, default 0
        Age of the renewal cycle in progress at time zero, in base units; the
        age in system time is ``t_u / mu_theta``.
    rho : float, default 1
        Deterministic busy-time fraction.
    """

    n: int
    alpha: float
    prior: Prior
    density: DensityModel
    horizon: float
    t_u: float = 0.0
    rho: float = 1.0

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ConfigError("n must be a positive integer")
        object.__setattr__(self, "n", int(self.n))
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ConfigError("alpha must be positive")
        if not (self.horizon >= 0 and math.isfinite(self.horizon)):
            raise ConfigError("horizon must be nonnegative and finite")
        if not self.t_u >= 0:
            raise ConfigError("t_u must be nonnegative")
        if not (0 < self.rho <= 1):
            raise ConfigError("rho must lie in (0, 1]")
        mu = self.alpha + np.array(self.prior.support) / math.sqrt(self.n)
        if np.any(mu <= 0):
            bad = [l for l, m in zip(self.prior.support, mu) if m <= 0]
            raise ConfigError(f"non-positive rate for support points {bad}")

    @property
    def support(self) -> np.ndarray:
        return np.array(self.prior.support)

    def rate(self, l: float) -> float:
        return self.alpha + l / math.sqrt(self.n)

    @property
    def unscaled_horizon(self) -> float:
        """Working-time horizon ``rho n T``."""
        return self.rho * self.n * self.horizon

    def with_(self, **changes) -> "SystemSpec":
        return replace(self, **changes)


@dataclass(frozen=True)
class ArrivalPath:
    """Arrival epochs of one system run.

    Attributes
    ----------
    theta : float
        The drawn parameter.
    epochs : ndarray
        Strictly increasing working-time epochs in ``[0, work_horizon]``.
    next_epoch : float
        The first epoch past the horizon (used only for diagnostics).
    t_v : float
        Age of the cycle in progress at time zero, ``t_u / mu_theta``.
    work_horizon : float
        Working-time horizon covered by the path.
    n : int
        System index (scaled time ``t`` is clock time ``n t``).
    mu : float
        Arrival rate ``mu_theta``.
    clock_rate : float
        Working time per unit of observer clock time (``rho``; 1 when the
        system works all the time).
    """

    theta: float
    epochs: np.ndarray
    next_epoch: float
    t_v: float
    work_horizon: float
    n: int
    mu: float
    clock_rate: float = 1.0
    interarrivals: np.ndarray = field(default=None, repr=False)

    @property
    def residual_age_used(self) -> float:
        return self.t_v

    @property
    def clock_epochs(self) -> np.ndarray:
        """Epochs on the observer's clock (unscaled)."""
        return self.epochs / self.clock_rate

    @property
    def scaled_epochs(self) -> np.ndarray:
        return self.epochs / (self.clock_rate * self.n)

    def count(self, clock_time: float) -> int:
        """Number of arrivals up to (and including) unscaled clock time."""
        return int(np.searchsorted(self.epochs, clock_time * self.clock_rate, side="right"))


def rates(spec: SystemSpec) -> dict:
    """Map each support point ``l`` to ``mu_l = alpha + l / sqrt(n)``.

    >>> from renewal_bayes.density import Gamma
    >>> rates(SystemSpec(10**4, 1.0, Prior([-1, 0, 1]), Gamma(1.0), 1.0))
    {-1.0: 0.99, 0.0: 1.0, 1.0: 1.01}
    """
    return {l: spec.rate(l) for l in spec.prior.support}


def simulate_path(spec: SystemSpec, rng, theta: float | None = None) -> ArrivalPath:
    """Simulate one working-time path up to ``rho n T``.

    ``rng`` is a :class:`~renewal_bayes.streams.Stream` (or integer seed) for
    one replication; its sub-streams supply the parameter draw, the base
    interarrivals and the residual first interarrival. Passing ``theta`` fixes
    the parameter instead of drawing it; the base draws are the same either
    way, so paths for different ``theta`` are time changes of each other.
    """
    st = as_stream(rng)
    model = spec.density
    if theta is None:
        idx = spec.prior.draw_index(st.child(SUB_THETA).generator())
        theta = spec.prior.support[idx]
    theta = float(theta)
    mu = spec.rate(theta)
    if not mu > 0:
        raise DomainError("rate must be positive")
    horizon = spec.unscaled_horizon
    t_v = spec.t_u / mu
    if spec.t_u > 0:
        first = sample_residual_first(model, mu, t_v, st.child(SUB_RESIDUAL).generator())
        skip = 1  # base draw 0 is left unused so the coupling does not depend on t_u
    else:
        first = None
        skip = 0
    gen = st.child(SUB_BASE).generator()
    pieces = [] if first is None else [np.array([first])]
    reached = 0.0 if first is None else first
    while reached <= horizon:
        block = model._draw(gen, BLOCK)[skip:] / mu
        skip = 0
        pieces.append(block)
        reached += float(np.sum(block))
    inter = np.concatenate(pieces)
    epochs = np.cumsum(inter)
    over = int(np.searchsorted(epochs, horizon, side="right"))
    if over == len(epochs):  # rounding between the two sums; draw once more
        extra = model._draw(gen, BLOCK) / mu
        inter = np.concatenate([inter, extra])
        epochs = np.cumsum(inter)
        over = int(np.searchsorted(epochs, horizon, side="right"))
    next_epoch = float(epochs[over])
    epochs = epochs[:over]
    inter = inter[:over]
    return ArrivalPath(
        theta=theta,
        epochs=epochs,
        next_epoch=next_epoch,
        t_v=t_v,
        work_horizon=horizon,
        n=spec.n,
        mu=mu,
        clock_rate=1.0,
        interarrivals=inter,
    )


def scaled_observed(path: ArrivalPath, spec: SystemSpec, t) -> np.ndarray | float:
    """``(L(nt) - mu_0 n t) / sqrt(n)`` observed at scaled clock time ``t``.

    The centering uses the reference rate ``mu_0 = alpha`` (times the busy
    fraction for an intermittent path), never the unknown ``mu_theta``.
    """
    tt = np.asarray(t, dtype=float)
    limit = path.work_horizon / (path.clock_rate * path.n)
    if np.any(tt < 0) or np.any(tt > limit * (1 + 1e-12)):
        raise DomainError("t outside the simulated horizon")
    work = tt * path.n * path.clock_rate
    counts = np.searchsorted(path.epochs, work, side="right")
    val = (counts - spec.alpha * work) / math.sqrt(path.n)
    return float(val) if np.ndim(t) == 0 else val


def apply_busy_time(path: ArrivalPath, spec: SystemSpec) -> ArrivalPath:
    """Attach the observer clock of a system that works a fraction ``rho`` of the time.

    Working time ``w`` is observed at clock time ``w / rho``. The stored
    working-time epochs are unchanged; ``clock_epochs`` reflects the time
    change. With ``rho = 1`` the path is returned as is.
    """
    if not (0 < spec.rho <= 1):
        raise ConfigError("rho must lie in (0, 1]")
    if spec.rho == 1.0:
        return path
    return replace(path, clock_rate=spec.rho * path.clock_rate)


def score_walk(paths: Sequence[ArrivalPath], density: DensityModel, t: float) -> np.ndarray:
    """``W(t) = (sum_{i <= nt} [-x f'(x)/f(x)](V_i) - nt) / (sigma_f sqrt(n))`` per path.

    The base draws ``V_i = mu_theta * v_i`` are recovered from each path's
    interarrivals, so the first interarrival must be unconditioned
    (``t_u = 0``) and the path must contain at least ``nt`` arrivals.
    """
    sigma_f = compute_functionals(density).sigma_f
    out = np.empty(len(paths))
    for j, p in enumerate(paths):
        if p.t_v != 0.0:
            raise DomainError("score walk requires an unconditioned first interarrival")
        nt = int(math.floor(p.n * t))
        if nt > len(p.interarrivals):
            raise DomainError("path too short for the requested score walk")
        out[j] = _score_walk_from_base(p.interarrivals[:nt] * p.mu, density, p.n, t, sigma_f)
    return out


def _score_walk_from_base(base: np.ndarray, density: DensityModel, n: int, t: float, sigma_f: float) -> float:
    nt = int(math.floor(n * t))
    if nt == 0:
        return 0.0
    s = -math.fsum(density._score(base[:nt])) if nt < 64 else -float(np.sum(density._score(base[:nt])))
    return (s - nt) / (sigma_f * math.sqrt(n))


def sample_score_walk(density: DensityModel, n: int, t: float, reps: int, rng, threads: int = 1) -> np.ndarray:
    """``reps`` independent draws of the score walk ``W(t)`` of the n-th system.

    Replication ``i`` uses the base stream of ``rng.child(SCORE_WALK, i)``.
    """
    st = as_stream(rng)
    sigma_f = compute_functionals(density).sigma_f
    nt = int(math.floor(n * t))

    def one(i):
        gen = st.child(streams.SCORE_WALK, i, SUB_BASE).generator()
        base = density._draw(gen, nt) if nt > 0 else np.empty(0)
        return _score_walk_from_base(base, density, n, t, sigma_f)

    return np.array(replicate(one, reps, threads))
