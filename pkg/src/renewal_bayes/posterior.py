"""Exact posterior process of the n-th system.

For a hypothesis ``l`` with rate ``mu_l`` the log likelihood ratio against
the reference rate ``mu_0 = alpha`` after observing the arrivals up to working
time ``w`` has three parts:

* the sum over completed interarrivals ``x_i`` of
  ``log(mu_l f(mu_l x_i)) - log(mu_0 f(mu_0 x_i))``, where the first one is
  measured from the start of the cycle in progress, ``x_1 = e_1 + t_v``;
* the conditioning on the age ``t_v`` of that cycle,
  ``log S(mu_0 t_v) - log S(mu_l t_v)``;
* the censoring of the current cycle, ``log S(mu_l r) - log S(mu_0 r)`` with
  ``r`` the time since the last arrival (or ``w + t_v`` before the first one).

``S`` is the survival function of the base law. The last term makes the
posterior move between arrivals. The reference rate ``alpha`` need not be a
support point; when it is, its row is identically zero.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import streams
from .errors import DomainError, SurvivalUnderflowWarning
from .system import ArrivalPath, SystemSpec, apply_busy_time, simulate_path
from .streams import as_stream, replicate

__all__ = [
    "PosteriorPath",
    "log_likelihood",
    "log_phi_at",
    "posterior_path",
    "posterior_marginal_samples",
    "normalize",
    "write_csv",
    "LOG_TINY",
]

LOG_TINY = math.log(1e-300)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def normalize(log_weights: np.ndarray) -> np.ndarray:
    """Softmax along the last axis via log-sum-exp."""
    lw = np.asarray(log_weights, dtype=float)
    return np.exp(lw - logsumexp(lw, axis=-1, keepdims=True))


@dataclass(frozen=True)
class PosteriorPath:
    """Posterior probabilities over ``support`` on a grid of scaled times.

    ``log_phi[j, i]`` is the log likelihood ratio of ``support[i]`` at
    ``grid[j]``; ``left_log_phi`` holds the left limits (they differ from
    ``log_phi`` only at arrival epochs). ``underflow`` is set when a survival
    probability fell below ``1e-300``.
    """

    grid: np.ndarray
    support: np.ndarray
    log_prior: np.ndarray
    log_phi: np.ndarray
    left_log_phi: np.ndarray
    arrival: np.ndarray
    underflow: bool = False
    prior_probs: np.ndarray | None = None

    def _probs(self, lp):
        out = normalize(lp + self.log_prior)
        if self.prior_probs is not None:
            # rows without evidence reproduce the prior exactly
            flat = np.all(lp == 0.0, axis=1)
            if np.any(flat):
                out[flat] = self.prior_probs
        return out

    @property
    def probs(self) -> np.ndarray:
        return self._probs(self.log_phi)

    @property
    def left_probs(self) -> np.ndarray:
        return self._probs(self.left_log_phi)

    def log_odds(self, left: bool = False) -> np.ndarray:
        """``log(pi_1 / pi_0)`` for a two-point support (right values or left limits)."""
        if len(self.support) != 2:
            raise DomainError("log-odds need a two-point support")
        lp = self.left_log_phi if left else self.log_phi
        return (self.log_prior[1] - self.log_prior[0]) + (lp[:, 1] - lp[:, 0])

    def at(self, t: float) -> np.ndarray:
        """Posterior at scaled time ``t`` (right-continuous)."""
        j = int(np.searchsorted(self.grid, t, side="right")) - 1
        if j < 0:
            raise DomainError("t precedes the grid")
        return self.probs[j]

    def to_csv(self, path) -> None:
        write_csv(path, self.grid, self.support, self.probs)


def write_csv(path, grid, support, probs) -> None:
    """Columns ``t`` and one per support point, 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"pi[{_fmt(l)}]" for l in support])
        for t, row in zip(grid, probs):
            w.writerow([_fmt(t)] + [_fmt(x) for x in row])


class _Likelihood:
    """Vectorized log likelihood ratios of one path for a set of rates."""

    def __init__(self, path: ArrivalPath, spec: SystemSpec, support):
        self.model = spec.density
        self.support = np.asarray(support, dtype=float)
        self.mu0 = spec.alpha
        self.mu = spec.alpha + self.support / math.sqrt(spec.n)
        self.ref = self.support == 0.0
        self.epochs = path.epochs
        self.t_v = path.t_v
        self.underflow = False
        k = len(self.support)
        # the stored draws are exact; differences of epochs can round tiny gaps to zero
        if path.interarrivals is not None and len(path.interarrivals) == len(path.epochs):
            x = np.array(path.interarrivals, dtype=float)
        else:
            x = np.diff(path.epochs, prepend=0.0)
        x = np.maximum(x, np.finfo(float).tiny)
        if len(x):
            x[0] = path.epochs[0] + path.t_v
        self._x = x
        self.cum = np.zeros((k, len(x) + 1))
        self._done = 0
        cond = np.zeros(k)
        if path.t_v > 0:
            s0 = self._logsf(np.array([self.mu0 * path.t_v]))[0]
            for i in range(k):
                if not self.ref[i]:
                    cond[i] = s0 - self._logsf(np.array([self.mu[i] * path.t_v]))[0]
        self.cond = cond

    def _extend(self, upto: int) -> None:
        """Cumulative interarrival terms up to arrival ``upto``; continues a running sum."""
        if upto <= self._done:
            return
        lo = self._done
        x = self._x[lo:upto]
        lx0 = self.model._logpdf(self.mu0 * x)
        for i in range(len(self.support)):
            if self.ref[i]:
                continue
            inc = (math.log(self.mu[i]) - math.log(self.mu0)) + (self.model._logpdf(self.mu[i] * x) - lx0)
            inc[0] += self.cum[i, lo]
            np.cumsum(inc, out=self.cum[i, lo + 1 : upto + 1])
        self._done = upto

    def _logsf(self, x):
        x = np.asarray(x, dtype=float)
        v = np.zeros_like(x)
        pos = x > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            v[pos] = self.model._logsf(x[pos])
        bad = ~(v >= LOG_TINY)
        if np.any(bad):
            self.underflow = True
            warnings.warn("survival below 1e-300; log-survival saturated", SurvivalUnderflowWarning, stacklevel=3)
            v = np.where(np.isfinite(v), v, LOG_TINY)
        return v

    def evaluate(self, work: np.ndarray, left: bool = False, counts: np.ndarray | None = None) -> np.ndarray:
        """Log likelihood ratios at working times ``work``; shape ``(len(work), k)``.

        ``counts`` may supply the number of epochs ``<= work`` (``< work`` for
        left limits) when the caller already knows it.
        """
        work = np.asarray(work, dtype=float)
        if counts is None:
            counts = np.searchsorted(self.epochs, work, side="left" if left else "right")
        cnt = counts
        if len(cnt):
            self._extend(int(np.max(cnt)))
        if len(self.epochs):
            last = np.where(cnt > 0, self.epochs[np.maximum(cnt - 1, 0)], -self.t_v)
        else:
            last = np.full(work.shape, -self.t_v)
        r = work - last
        out = np.zeros((len(work), len(self.support)))
        cens0 = self._logsf(self.mu0 * r)
        for i in range(len(self.support)):
            if self.ref[i]:
                continue
            out[:, i] = self.cond[i] + self.cum[i, cnt] + (self._logsf(self.mu[i] * r) - cens0)
        return out


def _merge_grid(uniform: np.ndarray, epochs: np.ndarray, end: float):
    """Sorted union of a uniform grid, the epochs and ``end``, with arrival flags and counts."""
    uniform = uniform[uniform < end]
    # drop uniform points that coincide with an epoch
    pos = np.searchsorted(epochs, uniform, side="left")
    dup = (pos < len(epochs)) & (epochs[np.minimum(pos, len(epochs) - 1)] == uniform) if len(epochs) else np.zeros(len(uniform), bool)
    uniform, pos = uniform[~dup], pos[~dup]
    tail = [] if (len(epochs) and epochs[-1] == end) else [end]
    work = np.insert(epochs, pos, uniform)
    flags = np.insert(np.ones(len(epochs), dtype=bool), pos, np.zeros(len(uniform), dtype=bool))
    if tail:
        work = np.append(work, end)
        flags = np.append(flags, False)
    counts = np.cumsum(flags)
    return work, flags, counts


def log_phi_at(path: ArrivalPath, spec: SystemSpec, t, support=None) -> np.ndarray:
    """Log likelihood ratios at scaled clock times ``t``, shape ``(len(t), k)``."""
    support = spec.support if support is None else np.asarray(support, dtype=float)
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    work = tt * path.n * path.clock_rate
    if np.any(tt < 0) or np.any(work > path.work_horizon * (1 + 1e-12)):
        raise DomainError("t outside the simulated horizon")
    return _Likelihood(path, spec, support).evaluate(np.minimum(work, path.work_horizon))


def log_likelihood(path: ArrivalPath, spec: SystemSpec, l: float, t: float) -> float:
    """Log likelihood ratio of hypothesis ``l`` against the reference rate at scaled time ``t``."""
    return float(log_phi_at(path, spec, [t], support=[l])[0, 0])


class _PathPosterior:
    """Merged grid and likelihood of one path; evaluates any prefix of the grid."""

    def __init__(self, path: ArrivalPath, spec: SystemSpec, grid_step: float | None, prior):
        T = spec.horizon
        if grid_step is None:
            grid_step = T / 512 if T > 0 else 1.0
        if not grid_step > 0:
            raise DomainError("grid step must be positive")
        self.prior = spec.prior if prior is None else prior
        self.scale = path.n * path.clock_rate
        w_end = min(T * self.scale, path.work_horizon)
        m = int(math.floor(T / grid_step + 1e-9))
        uniform = np.arange(m + 1) * grid_step * self.scale
        ep = path.epochs[path.epochs <= w_end]
        self.work, self.is_arrival, self.counts = _merge_grid(uniform, ep, w_end)
        self.lik = _Likelihood(path, spec, self.prior.support)

    def __len__(self):
        return len(self.work)

    def index_at(self, t: float) -> int:
        """Number of grid points with scaled time ``<= t``."""
        return int(np.searchsorted(self.work, t * self.scale, side="right"))

    def build(self, stop: int | None = None) -> PosteriorPath:
        sl = slice(0, len(self.work) if stop is None else max(int(stop), 1))
        work, arr, cnt = self.work[sl], self.is_arrival[sl], self.counts[sl]
        right = self.lik.evaluate(work, counts=cnt)
        left = self.lik.evaluate(work, left=True, counts=cnt - arr)
        return PosteriorPath(
            grid=work / self.scale,
            support=np.array(self.prior.support),
            log_prior=self.prior.log_probs(),
            log_phi=right,
            left_log_phi=left,
            arrival=arr,
            underflow=self.lik.underflow,
            prior_probs=np.array(self.prior.probs),
        )


def posterior_path(path: ArrivalPath, spec: SystemSpec, grid_step: float | None = None, prior=None) -> PosteriorPath:
    """Posterior process on the union of a uniform grid, the arrival epochs and ``T``.

    Parameters
    ----------
    path : ArrivalPath
        An observed path (with its observer clock attached).
    spec : SystemSpec
        The system; ``spec.horizon`` is the scaled horizon ``T``.
    grid_step : float, optional
        Spacing of the uniform part of the grid; default ``T / 512``.
    prior : Prior, optional
        Overrides ``spec.prior``.
    """
    return _PathPosterior(path, spec, grid_step, prior).build()


def posterior_marginal_samples(spec: SystemSpec, t: float, reps: int, rng, threads: int = 1):
    """Posterior at scaled time ``t`` over ``reps`` independent replications.

    Replication ``i`` simulates a path with stream ``rng.child(SYSTEM, i)``;
    for ``rho < 1`` the busy-time clock is applied. Returns an array of shape
    ``(reps, k)`` with the posterior probabilities of each support point.
    """
    if reps < 1:
        raise DomainError("reps must be positive")
    st = as_stream(rng)
    run = spec.with_(horizon=t)
    logp = spec.prior.log_probs()

    def one(i):
        path = apply_busy_time(simulate_path(run, st.child(streams.SYSTEM, i)), run)
        if t == 0:
            return np.array(spec.prior.probs)
        return normalize(log_phi_at(path, run, [t])[0] + logp)

    return np.vstack(replicate(one, reps, threads))
