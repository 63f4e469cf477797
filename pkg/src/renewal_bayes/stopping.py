"""Discounted first-exit stopping problems on the posterior of a two-point prior.

A decision maker watches the posterior ``pi(t)`` of the hypothesis
``support[1]`` and stops the first time it leaves a continuation region
``D``. The expected discounted loss of the strategy is

    E[ int_0^tau r e^{-rt} k(pi(t)) dt + r e^{-r tau} K(pi(tau)) ]

with running cost ``k`` and terminal cost ``K``. For the n-th renewal system
the same functional is evaluated with the n-side costs ``k^n`` and
``(r/n) K^n``.

Three cost kinds are provided:

``Bandit(c0, cl)``
    ``k(pi) = cl pi + c0 (1 - pi)`` and ``K = 0``, with ``cl < 0 < c0``; the
    support must be ``{0, c0 - cl}``. The n-side running cost
    ``(c0 - l) pi + c0 (1 - pi)`` then equals ``k`` exactly.
``SeqTest(a, b, c)``
    ``k = c`` and ``K(pi) = min(a pi, b (1 - pi))``; the n-side costs are
    ``c`` and ``n K``.
``General(grid, k, K)``
    tabulated costs interpolated linearly in ``pi``; the n-side costs are
    ``k`` and ``n K``.

Simulation runs to the horizon ``T``; strategies that have not stopped by
``T`` are truncated, and ``C_k e^{-rT}`` (``C_k = sup |k|``) bounds the
neglected tail.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.special import expit, logit

from . import streams
from .brownian import CHUNK, BrownianPosteriorSpec, LogOddsPaths, simulate_log_odds
from .density import compute_functionals
from .errors import ConfigError, DomainError
from .posterior import PosteriorPath, _PathPosterior, posterior_path
from .streams import as_stream, replicate
from .system import Prior, SystemSpec, apply_busy_time, simulate_path

__all__ = [
    "ContinuationRegion",
    "Bandit",
    "SeqTest",
    "General",
    "StoppingSpec",
    "ExitResult",
    "ValueEstimate",
    "first_exit",
    "payoff_from_path",
    "value_n",
    "value_n_regions",
    "value_n_raw_bandit",
    "value_limit",
    "CutoffSearch",
    "search_cutoff_bandit",
    "IntervalSearch",
    "search_interval_seqtest",
    "GapReport",
    "suboptimality_gap",
]


# ----------------------------------------------------------------------------------
# continuation regions
# ----------------------------------------------------------------------------------
_INTERVAL_RE = re.compile(r"^\s*([\(\[])\s*([^,\s]+)\s*,\s*([^,\s\)\]]+)\s*([\)\]])\s*$")


@dataclass(frozen=True)
class ContinuationRegion:
    """Finite union of disjoint, separated intervals in ``[0, 1]``.

    Intervals are open except that an endpoint at 0 or 1 may be closed.
    Membership is decided on the log-odds scale, where a posterior strictly
    inside ``(0, 1)`` is finite; closing an endpoint at 0 or 1 therefore only
    records intent.
    """

    intervals: tuple  # ((a, b, closed_left, closed_right), ...)

    def __init__(self, intervals):
        items = []
        for it in intervals:
            if isinstance(it, str):
                items.append(self._parse_one(it))
                continue
            it = tuple(it)
            if len(it) == 2:
                a, b = float(it[0]), float(it[1])
                items.append((a, b, False, b == 1.0))
            elif len(it) == 4:
                items.append((float(it[0]), float(it[1]), bool(it[2]), bool(it[3])))
            else:
                raise ConfigError(f"cannot read interval {it!r}")
        items.sort(key=lambda x: x[0])
        for a, b, cl, cr in items:
            if not (0.0 <= a < b <= 1.0):
                raise ConfigError(f"interval ({a}, {b}) must satisfy 0 <= a < b <= 1")
            if cl and a != 0.0 or cr and b != 1.0:
                raise ConfigError("only endpoints at 0 or 1 may be closed")
        for (a1, b1, *_), (a2, b2, *_) in zip(items[:-1], items[1:]):
            if not b1 < a2:
                raise ConfigError("intervals must be disjoint and must not touch")
        object.__setattr__(self, "intervals", tuple(items))

    @staticmethod
    def _parse_one(text):
        m = _INTERVAL_RE.match(text)
        if not m:
            raise ConfigError(f"cannot parse interval {text!r}; use e.g. '(0.3, 1]'")
        lb, a, b, rb = m.groups()
        try:
            return (float(a), float(b), lb == "[", rb == "]")
        except ValueError as exc:
            raise ConfigError(f"cannot parse interval {text!r}") from exc

    @classmethod
    def parse(cls, text: str) -> "ContinuationRegion":
        """Parse ``"(0.2, 0.4) U (0.6, 1]"``; an empty string gives the empty region."""
        parts = [p for p in re.split(r"\s*[Uu∪]\s*", text.strip()) if p]
        return cls(parts)

    @classmethod
    def cutoff(cls, p: float) -> "ContinuationRegion":
        """``(p, 1]``: continue while the posterior stays above ``p``."""
        if p >= 1.0:
            return cls([])
        return cls([(p, 1.0, False, True)])

    @classmethod
    def interval(cls, q1: float, q2: float) -> "ContinuationRegion":
        if q2 <= q1:
            return cls([])
        return cls([(q1, q2, False, False)])

    @cached_property
    def bounds(self) -> np.ndarray:
        """Log-odds boundaries ``[A0, B0, A1, B1, ...]``."""
        out = []
        with np.errstate(divide="ignore"):
            for a, b, *_ in self.intervals:
                out += [float(logit(a)), float(logit(b))]
        return np.array(out)

    def component(self, y) -> np.ndarray:
        """Index of the interval containing log-odds ``y``, or -1."""
        y = np.asarray(y, dtype=float)
        bd = self.bounds
        if len(bd) == 0:
            return np.full(y.shape, -1)
        if len(bd) == 2:
            return np.where((y > bd[0]) & (y < bd[1]), 0, -1)
        idx = np.searchsorted(bd, y, side="right")
        inside = (idx % 2 == 1) & (y != bd[np.maximum(idx - 1, 0)])
        return np.where(inside, idx // 2, -1)

    def contains(self, pi) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return self.component(logit(np.asarray(pi, dtype=float))) >= 0

    def __str__(self):
        parts = []
        for a, b, cl, cr in self.intervals:
            parts.append(f"{'[' if cl else '('}{a:g}, {b:g}{']' if cr else ')'}")
        return " U ".join(parts) if parts else "{}"


# ----------------------------------------------------------------------------------
# costs
# ----------------------------------------------------------------------------------
@dataclass(frozen=True)
class Bandit:
    """One-armed bandit with unknown arm: ``k(pi) = cl pi + c0 (1 - pi)``, ``K = 0``."""

    c0: float
    cl: float

    def __post_init__(self):
        if not (self.cl < 0 < self.c0):
            raise ConfigError("bandit costs need cl < 0 < c0")

    @property
    def drift(self) -> float:
        """The support point ``l = c0 - cl``."""
        return self.c0 - self.cl

    def k(self, pi):
        return self.cl * pi + self.c0 * (1.0 - pi)

    def K(self, pi):
        return np.zeros_like(np.asarray(pi, dtype=float))

    def k_n(self, pi, support):
        l = support[1]
        return (self.c0 - l) * pi + self.c0 * (1.0 - pi)

    def K_n(self, pi, n):
        return np.zeros_like(np.asarray(pi, dtype=float))

    def bound_k(self) -> float:
        return max(abs(self.c0), abs(self.cl))

    def bound_K(self) -> float:
        return 0.0

    def check_support(self, support):
        if len(support) != 2 or support[0] != 0.0 or abs(support[1] - self.drift) > 1e-12:
            raise ConfigError(f"bandit costs require the support {{0, {self.drift:g}}}, got {list(support)}")


@dataclass(frozen=True)
class SeqTest:
    """Sequential test: running cost ``c``, terminal cost ``min(a pi, b (1 - pi))``."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0 and self.c >= 0):
            raise ConfigError("sequential testing needs a, b > 0 and c >= 0")

    def k(self, pi):
        return np.full_like(np.asarray(pi, dtype=float), self.c)

    def K(self, pi):
        pi = np.asarray(pi, dtype=float)
        return np.minimum(self.a * pi, self.b * (1.0 - pi))

    def k_n(self, pi, support):
        return self.k(pi)

    def K_n(self, pi, n):
        return n * self.K(pi)

    def bound_k(self) -> float:
        return abs(self.c)

    def bound_K(self) -> float:
        return self.a * self.b / (self.a + self.b)

    def check_support(self, support):
        if len(support) != 2:
            raise ConfigError("sequential testing needs a two-point support")


@dataclass(frozen=True)
class General:
    """Tabulated costs ``k`` and ``K`` on an increasing grid of ``pi`` covering [0, 1]."""

    grid: tuple
    k_values: tuple
    K_values: tuple

    def __init__(self, grid, k_values, K_values):
        g = np.asarray(grid, dtype=float)
        kv = np.asarray(k_values, dtype=float)
        Kv = np.asarray(K_values, dtype=float)
        if g.ndim != 1 or len(g) < 2 or g[0] != 0.0 or g[-1] != 1.0 or np.any(np.diff(g) <= 0):
            raise ConfigError("cost grid must increase from 0 to 1")
        if kv.shape != g.shape or Kv.shape != g.shape:
            raise ConfigError("cost tables must match the grid")
        if not (np.all(np.isfinite(kv)) and np.all(np.isfinite(Kv))):
            raise ConfigError("cost tables must be finite")
        object.__setattr__(self, "grid", tuple(g))
        object.__setattr__(self, "k_values", tuple(kv))
        object.__setattr__(self, "K_values", tuple(Kv))

    @classmethod
    def constant(cls, k: float, K: float = 0.0) -> "General":
        return cls([0.0, 1.0], [k, k], [K, K])

    def k(self, pi):
        return np.interp(pi, self.grid, self.k_values)

    def K(self, pi):
        return np.interp(pi, self.grid, self.K_values)

    def k_n(self, pi, support):
        return self.k(pi)

    def K_n(self, pi, n):
        return n * self.K(pi)

    def bound_k(self) -> float:
        return float(np.max(np.abs(self.k_values)))

    def bound_K(self) -> float:
        return float(np.max(np.abs(self.K_values)))

    def check_support(self, support):
        if len(support) != 2:
            raise ConfigError("stopping problems need a two-point support")


@dataclass(frozen=True)
class StoppingSpec:
    """Discount rate, costs, continuation region and prior weight ``pi0`` of ``support[1]``."""

    r: float
    cost: object
    region: ContinuationRegion
    pi0: float

    def __post_init__(self):
        if not (self.r > 0 and math.isfinite(self.r)):
            raise ConfigError("discount rate must be positive")
        if not (0.0 < self.pi0 < 1.0):
            raise ConfigError("pi0 must lie in (0, 1)")
        if not isinstance(self.cost, (Bandit, SeqTest, General)):
            raise ConfigError("cost must be Bandit, SeqTest or General")

    def with_region(self, region: ContinuationRegion) -> "StoppingSpec":
        return StoppingSpec(self.r, self.cost, region, self.pi0)

    def prior(self, support) -> Prior:
        return Prior(list(support), [1.0 - self.pi0, self.pi0])

    @property
    def tail_bound(self) -> float:
        return 0.0  # set per horizon by the estimators


# ----------------------------------------------------------------------------------
# exits on a posterior path
# ----------------------------------------------------------------------------------
@dataclass(frozen=True)
class ExitResult:
    """First exit from the region: ``time`` is None if the path never left by ``T``."""

    time: float | None
    index: int
    log_odds: float
    kind: str  # "initial", "drift", "jump" or "none"


def _exit_scan(t, y_right, y_left, region: ContinuationRegion) -> ExitResult:
    comp_r = region.component(y_right)
    comp_l = region.component(y_left)
    if comp_r[0] < 0:
        return ExitResult(float(t[0]), 0, float(y_right[0]), "initial")
    seg = np.flatnonzero(comp_l[1:] != comp_r[:-1])
    jump = np.flatnonzero(comp_r < 0)
    j_seg = seg[0] + 1 if len(seg) else len(t)
    j_jump = jump[0] if len(jump) else len(t)
    if j_seg == len(t) and j_jump == len(t):
        return ExitResult(None, len(t) - 1, float(y_right[-1]), "none")
    if j_seg <= j_jump:
        j = j_seg
        c = comp_r[j - 1]
        bd = region.bounds
        lo_b, hi_b = bd[2 * c], bd[2 * c + 1]
        y0, y1 = y_right[j - 1], y_left[j]
        barrier = lo_b if y1 <= lo_b else hi_b
        frac = (y0 - barrier) / (y0 - y1) if y0 != y1 else 1.0
        frac = min(max(frac, 0.0), 1.0)
        tau = t[j - 1] + frac * (t[j] - t[j - 1])
        return ExitResult(float(tau), int(j), float(barrier), "drift")
    return ExitResult(float(t[j_jump]), int(j_jump), float(y_right[j_jump]), "jump")


def first_exit(pp: PosteriorPath, region: ContinuationRegion, l_index: int = 1) -> ExitResult:
    """First time the posterior of ``support[l_index]`` leaves ``region``.

    Between grid points the posterior moves continuously (censoring drift);
    at arrival epochs it may jump. A drift exit between two grid points is
    located by linear interpolation of the log-odds to the crossed boundary;
    a jump exit happens at the arrival epoch.
    """
    if len(pp.grid) == 0:
        raise DomainError("empty posterior path")
    y_r = pp.log_odds()
    y_l = pp.log_odds(left=True)
    if l_index == 0:
        y_r, y_l = -y_r, -y_l
    return _exit_scan(pp.grid, y_r, y_l, region)


def payoff_from_path(pp: PosteriorPath, region: ContinuationRegion, stop: StoppingSpec, n: int | None = None):
    """Discounted cost of the first-exit strategy along one posterior path.

    ``n=None`` uses the limit costs ``k`` and ``r K``; otherwise the n-side
    costs ``k^n`` and ``(r/n) K^n``. Returns ``(payoff, exit)`` where the
    payoff is truncated at the end of the grid when the path never exits.
    """
    cost, r = stop.cost, stop.r
    support = pp.support
    if n is None:
        kf = cost.k
        Kf = lambda p: r * cost.K(p)
    else:
        kf = lambda p: cost.k_n(p, support)
        Kf = lambda p: (r / n) * cost.K_n(p, n)
    ex = first_exit(pp, region)
    t = pp.grid
    y_r = pp.log_odds()
    y_l = pp.log_odds(left=True)
    if ex.kind == "initial":
        return float(Kf(expit(y_r[0]))), ex
    j = ex.index
    disc = r * np.exp(-r * t[: j + 1])
    g_r = disc * kf(expit(y_r[: j + 1]))
    g_l = disc * kf(expit(y_l[: j + 1]))
    dt = np.diff(t[: j + 1])
    if ex.kind == "none":
        return float(np.sum(0.5 * (g_r[:-1] + g_l[1:]) * dt)), ex
    full = float(np.sum(0.5 * (g_r[:-2] + g_l[1:-1]) * dt[:-1])) if j >= 2 else 0.0
    tau = ex.time
    if ex.kind == "drift":
        end_pi = expit(ex.log_odds)
        part = 0.5 * (tau - t[j - 1]) * (g_r[j - 1] + r * math.exp(-r * tau) * kf(end_pi))
    else:
        end_pi = expit(y_r[j])
        part = 0.5 * (t[j] - t[j - 1]) * (g_r[j - 1] + g_l[j])
    return full + float(part) + math.exp(-r * tau) * float(Kf(end_pi)), ex


# ----------------------------------------------------------------------------------
# estimates
# ----------------------------------------------------------------------------------
@dataclass(frozen=True)
class ValueEstimate:
    """Monte-Carlo value of a strategy with an exit-time summary.

    ``exit_times`` holds ``tau ^ T`` per replication and ``stopped`` whether
    the strategy stopped by ``T``. ``tail_bound`` is ``C_k e^{-rT}``, a bound
    on the neglected payoff after ``T``.
    """

    value_mean: float
    value_stderr: float
    reps: int
    mean_exit_time: float
    frac_never_stopped_by_T: float
    tail_bound: float
    payoffs: np.ndarray = field(repr=False)
    exit_times: np.ndarray = field(repr=False)
    stopped: np.ndarray = field(repr=False)

    @classmethod
    def from_samples(cls, payoffs, exit_times, stopped, tail_bound):
        payoffs = np.asarray(payoffs, dtype=float)
        reps = len(payoffs)
        se = float(np.std(payoffs, ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
        return cls(
            value_mean=float(np.mean(payoffs)),
            value_stderr=se,
            reps=reps,
            mean_exit_time=float(np.mean(exit_times)),
            frac_never_stopped_by_T=float(1.0 - np.mean(stopped)),
            tail_bound=float(tail_bound),
            payoffs=payoffs,
            exit_times=np.asarray(exit_times, dtype=float),
            stopped=np.asarray(stopped, dtype=bool),
        )

    def summary(self) -> dict:
        return {
            "value_mean": self.value_mean,
            "value_stderr": self.value_stderr,
            "reps": self.reps,
            "mean_exit_time": self.mean_exit_time,
            "frac_never_stopped_by_T": self.frac_never_stopped_by_T,
            "tail_bound": self.tail_bound,
        }


STAGES = (1.0 / 16, 1.0 / 4, 1.0)  # prefix fractions of the horizon evaluated in turn


def _tail(stop: StoppingSpec, T: float) -> float:
    return stop.cost.bound_k() * math.exp(-stop.r * T)


def value_n_regions(
    spec: SystemSpec,
    stop: StoppingSpec,
    regions: Sequence[ContinuationRegion],
    reps: int,
    rng,
    grid_step: float | None = None,
    threads: int = 1,
) -> list[ValueEstimate]:
    """Values of several regions on the n-th system with common random numbers.

    Every region is evaluated on the same simulated paths; replication ``i``
    uses ``rng.child(SYSTEM, i)``. The prior is ``(1 - pi0, pi0)`` on
    ``spec.prior.support``.
    """
    support = spec.prior.support
    stop.cost.check_support(support)
    prior = stop.prior(support)
    run = spec.with_(prior=prior)
    st = as_stream(rng)
    T = spec.horizon

    def one(i):
        path = apply_busy_time(simulate_path(run, st.child(streams.SYSTEM, i)), run)
        builder = _PathPosterior(path, run, grid_step, None)
        # evaluate growing prefixes; an exit inside a prefix is final
        for frac in STAGES:
            stop_idx = len(builder) if frac >= 1.0 else builder.index_at(frac * T)
            pp = builder.build(stop_idx)
            full = stop_idx >= len(builder)
            row = []
            for reg in regions:
                pay, ex = payoff_from_path(pp, reg, stop, n=spec.n)
                if ex.time is None and not full:
                    break
                row.append((pay, T if ex.time is None else ex.time, ex.time is not None))
            else:
                return row
        raise AssertionError("unreachable")

    rows = replicate(one, reps, threads)
    out = []
    for k in range(len(regions)):
        col = [r[k] for r in rows]
        out.append(ValueEstimate.from_samples([c[0] for c in col], [c[1] for c in col], [c[2] for c in col], _tail(stop, T)))
    return out


def value_n(spec: SystemSpec, stop: StoppingSpec, reps: int, rng, grid_step: float | None = None, threads: int = 1) -> ValueEstimate:
    """Value of the first-exit strategy from ``stop.region`` on the n-th system."""
    return value_n_regions(spec, stop, [stop.region], reps, rng, grid_step, threads)[0]


def value_n_raw_bandit(spec: SystemSpec, stop: StoppingSpec, reps: int, rng, grid_step: float | None = None):
    """Bandit value from the raw arrival increments, next to the posterior representation.

    The raw estimator of one replication is
    ``sqrt(n) [c^n (1 - e^{-r tau}) - (r/n) sum_{s_i <= tau} e^{-r s_i}]`` with
    ``c^n = alpha + c0 / sqrt(n)`` and ``s_i`` the scaled epochs. Both
    estimators use the same paths. Returns ``(posterior_estimate, raw_estimate)``.
    """
    if not isinstance(stop.cost, Bandit):
        raise ConfigError("raw increments are defined for the bandit only")
    if spec.rho != 1.0:
        raise ConfigError("raw increments assume rho = 1")
    support = spec.prior.support
    stop.cost.check_support(support)
    run = spec.with_(prior=stop.prior(support))
    st = as_stream(rng)
    T, n, r = spec.horizon, spec.n, stop.r
    c_n = spec.alpha + stop.cost.c0 / math.sqrt(n)

    def one(i):
        path = simulate_path(run, st.child(streams.SYSTEM, i))
        pp = posterior_path(path, run, grid_step)
        pay, ex = payoff_from_path(pp, stop.region, stop, n=n)
        tau = T if ex.time is None else ex.time
        s = path.scaled_epochs
        # an arrival that triggers the exit is counted
        s = s[s <= tau]
        raw = math.sqrt(n) * (c_n * (1.0 - math.exp(-r * tau)) - (r / n) * math.fsum(np.exp(-r * s)))
        return pay, raw, tau, ex.time is not None

    rows = replicate(one, reps)
    tail = _tail(stop, T)
    post = ValueEstimate.from_samples([x[0] for x in rows], [x[2] for x in rows], [x[3] for x in rows], tail)
    raw = ValueEstimate.from_samples([x[1] for x in rows], [x[2] for x in rows], [x[3] for x in rows], tail)
    return post, raw


# -- Brownian limit -----------------------------------------------------------------
def _limit_spec(bspec: BrownianPosteriorSpec, stop: StoppingSpec) -> BrownianPosteriorSpec:
    support = bspec.prior.support
    stop.cost.check_support(support)
    return BrownianPosteriorSpec(bspec.sigma, stop.prior(support), bspec.horizon, bspec.grid_step)


class _Chunk:
    """Discounted running-cost integrals of one chunk of log-odds paths."""

    def __init__(self, paths: LogOddsPaths, stop: StoppingSpec):
        self.p = paths
        self.stop = stop
        r = stop.r
        t = paths.grid
        self.dt = np.diff(t)
        self.g = r * np.exp(-r * t) * stop.cost.k(expit(paths.y))
        inc = 0.5 * (self.g[:, :-1] + self.g[:, 1:]) * self.dt
        self.cum = np.concatenate([np.zeros((len(paths.y), 1)), np.cumsum(inc, axis=1)], axis=1)

    def payoff(self, rows, j, barrier, lower):
        """Payoff of exits in interval ``j`` through ``barrier`` (arrays over ``rows``)."""
        p, r, cost = self.p, self.stop.r, self.stop.cost
        t = p.grid
        y0 = p.y[rows, j]
        y1 = p.y[rows, j + 1]
        crossed = (y1 <= barrier) if lower else (y1 >= barrier)
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(crossed, (y0 - barrier) / (y0 - y1), 0.5)
        frac = np.clip(np.nan_to_num(frac, nan=0.5), 0.0, 1.0)
        tau = t[j] + frac * self.dt[j]
        pi_b = expit(barrier)
        disc = np.exp(-r * tau)
        part = 0.5 * (tau - t[j]) * (self.g[rows, j] + r * disc * cost.k(pi_b))
        return self.cum[rows, j] + part + r * disc * cost.K(pi_b), tau

    def never(self, rows):
        return self.cum[rows, -1]


def _first_true(mask):
    """Index of the first True along axis 1 (``-1`` if none)."""
    has = mask.any(axis=1)
    return np.where(has, mask.argmax(axis=1), -1)


def _limit_region(ch: _Chunk, region: ContinuationRegion, y0: float, stop: StoppingSpec):
    p = ch.p
    R = len(p.y)
    T = p.grid[-1]
    c = int(region.component(np.array([y0]))[0])
    if c < 0:
        pay = np.full(R, stop.r * float(stop.cost.K(expit(y0))))
        return pay, np.zeros(R), np.ones(R, dtype=bool)
    bd = region.bounds
    A, B = bd[2 * c], bd[2 * c + 1]
    j_lo = _first_true(p.lo <= A) if np.isfinite(A) else np.full(R, -1)
    j_hi = _first_true(p.hi >= B) if np.isfinite(B) else np.full(R, -1)
    big = len(p.grid)
    jl = np.where(j_lo < 0, big, j_lo)
    jh = np.where(j_hi < 0, big, j_hi)
    pay = ch.never(np.arange(R)).copy()
    tau = np.full(R, T)
    stopped = np.minimum(jl, jh) < big
    for lower, jj, barrier in ((True, jl, A), (False, jh, B)):
        sel = np.flatnonzero((jj < big) & (jj <= (jh if lower else jl - 1)))
        if len(sel):
            pv, tv = ch.payoff(sel, jj[sel], barrier, lower)
            pay[sel] = pv
            tau[sel] = tv
    return pay, tau, stopped


def value_limit(bspec: BrownianPosteriorSpec, stop: StoppingSpec, reps: int, rng) -> ValueEstimate:
    """Value of the first-exit strategy when the posterior is driven by a Brownian observation.

    Log-odds paths are simulated exactly on the grid of ``bspec`` with bridge
    extrema between grid points. A path exits in the first interval whose
    bridge extremum reaches a boundary of the component of ``D`` containing
    the starting point; the exit time is interpolated linearly when the
    interval endpoint is beyond the boundary and taken at the midpoint
    otherwise. The running cost is integrated by the trapezoidal rule.
    """
    spec = _limit_spec(bspec, stop)
    st = as_stream(rng)
    y0 = math.log(stop.pi0) - math.log1p(-stop.pi0)
    pays, taus, stops = [], [], []
    for c in range(-(-reps // CHUNK)):
        ch = _Chunk(simulate_log_odds(spec, c, st), stop)
        pay, tau, stopped = _limit_region(ch, stop.region, y0, stop)
        pays.append(pay)
        taus.append(tau)
        stops.append(stopped)
    cat = lambda xs: np.concatenate(xs)[:reps]
    return ValueEstimate.from_samples(cat(pays), cat(taus), cat(stops), _tail(stop, spec.horizon))


# -- threshold searches -------------------------------------------------------------
@dataclass(frozen=True)
class CutoffSearch:
    """Value curve of cut-off strategies ``(p, 1]`` with its stderr band."""

    grid: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    p_star: float
    index: int
    payoffs: np.ndarray = field(repr=False)

    def table(self):
        return [{"p": p, "value": v, "stderr": s} for p, v, s in zip(self.grid, self.values, self.stderr)]


def _cutoff_payoffs(ch: _Chunk, grid: np.ndarray, stop: StoppingSpec, y0: float) -> np.ndarray:
    p = ch.p
    R, G = len(p.y), len(grid)
    with np.errstate(divide="ignore"):
        A = logit(np.asarray(grid, dtype=float))
    runmin = np.minimum.accumulate(p.lo, axis=1)
    m = runmin.shape[1]
    out = np.empty((R, G))
    immediate = ~(A < y0)
    never_pay = ch.never(np.arange(R))
    idx = np.empty((R, G), dtype=np.int64)
    for i in range(R):
        idx[i] = np.searchsorted(-runmin[i], -A, side="left")
    for g in range(G):
        if immediate[g]:
            out[:, g] = stop.r * float(stop.cost.K(expit(y0)))
            continue
        jj = idx[:, g]
        hit = jj < m
        out[:, g] = never_pay
        sel = np.flatnonzero(hit)
        if len(sel):
            out[sel, g] = ch.payoff(sel, jj[sel], A[g], True)[0]
    return out


def search_cutoff_bandit(bspec: BrownianPosteriorSpec, stop: StoppingSpec, grid: Sequence[float], reps: int, rng) -> CutoffSearch:
    """Evaluate cut-off strategies ``(p, 1]`` on common Brownian paths and return the best.

    Every grid point is evaluated on the same replications, so differences
    along the curve carry little Monte-Carlo noise. ``p`` at or above
    ``pi0`` means stopping at once. Any cost kind is accepted.
    """
    grid = np.asarray(grid, dtype=float)
    if np.any((grid < 0) | (grid > 1)):
        raise DomainError("cut-off grid must lie in [0, 1]")
    spec = _limit_spec(bspec, stop)
    st = as_stream(rng)
    y0 = math.log(stop.pi0) - math.log1p(-stop.pi0)
    rows = []
    for c in range(-(-reps // CHUNK)):
        ch = _Chunk(simulate_log_odds(spec, c, st), stop)
        rows.append(_cutoff_payoffs(ch, grid, stop, y0))
    pay = np.vstack(rows)[:reps]
    vals = pay.mean(axis=0)
    se = pay.std(axis=0, ddof=1) / math.sqrt(reps) if reps > 1 else np.zeros(len(grid))
    k = int(np.argmin(vals))
    return CutoffSearch(grid=grid, values=vals, stderr=se, p_star=float(grid[k]), index=k, payoffs=pay)


@dataclass(frozen=True)
class IntervalSearch:
    """Value surface of interval strategies ``(q1, q2)``; rows index ``q1``."""

    q1: np.ndarray
    q2: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    q1_star: float
    q2_star: float


def search_interval_seqtest(
    bspec: BrownianPosteriorSpec, stop: StoppingSpec, q1_grid: Sequence[float], q2_grid: Sequence[float], reps: int, rng
) -> IntervalSearch:
    """Grid search over continuation intervals ``(q1, q2)`` with common random numbers.

    A cell with ``q1 >= pi0`` or ``q2 <= pi0`` stops at once. The two
    barriers are checked against independently sampled bridge minima and
    maxima in each grid interval.
    """
    if not isinstance(stop.cost, SeqTest):
        raise ConfigError("interval search expects sequential-testing costs")
    q1 = np.asarray(q1_grid, dtype=float)
    q2 = np.asarray(q2_grid, dtype=float)
    spec = _limit_spec(bspec, stop)
    st = as_stream(rng)
    y0 = math.log(stop.pi0) - math.log1p(-stop.pi0)
    with np.errstate(divide="ignore"):
        A = logit(q1)
        B = logit(q2)
    G1, G2 = len(q1), len(q2)
    imm = stop.r * float(stop.cost.K(expit(y0)))
    acc = np.zeros((G1, G2))
    acc2 = np.zeros((G1, G2))
    count = 0
    for c in range(-(-reps // CHUNK)):
        ch = _Chunk(simulate_log_odds(spec, c, st), stop)
        p = ch.p
        R = min(len(p.y), reps - count)
        if R <= 0:
            break
        runmin = np.minimum.accumulate(p.lo[:R], axis=1)
        runmax = np.maximum.accumulate(p.hi[:R], axis=1)
        m = runmin.shape[1]
        il = np.empty((R, G1), dtype=np.int64)
        ih = np.empty((R, G2), dtype=np.int64)
        for i in range(R):
            il[i] = np.searchsorted(-runmin[i], -A, side="left")
            ih[i] = np.searchsorted(runmax[i], B, side="left")
        never = ch.never(np.arange(R))
        rows = np.arange(R)
        pay_lo = np.empty((R, G1))
        for g in range(G1):
            jj = il[:, g]
            pay_lo[:, g] = never
            sel = np.flatnonzero(jj < m)
            if len(sel):
                pay_lo[sel, g] = ch.payoff(rows[sel], jj[sel], A[g], True)[0]
        pay_hi = np.empty((R, G2))
        for g in range(G2):
            jj = ih[:, g]
            pay_hi[:, g] = never
            sel = np.flatnonzero(jj < m)
            if len(sel):
                pay_hi[sel, g] = ch.payoff(rows[sel], jj[sel], B[g], False)[0]
        lower_first = il[:, :, None] <= ih[:, None, :]
        cell = np.where(lower_first, pay_lo[:, :, None], pay_hi[:, None, :])
        empty = (A[:, None] >= y0) | (B[None, :] <= y0)
        cell = np.where(empty[None], imm, cell)
        acc += cell.sum(axis=0)
        acc2 += (cell * cell).sum(axis=0)
        count += R
    mean = acc / count
    var = np.maximum(acc2 / count - mean * mean, 0.0) * count / max(count - 1, 1)
    se = np.sqrt(var / count)
    k = np.unravel_index(int(np.argmin(mean)), mean.shape)
    return IntervalSearch(q1=q1, q2=q2, values=mean, stderr=se, q1_star=float(q1[k[0]]), q2_star=float(q2[k[1]]))


# -- suboptimality of the naive noise level -----------------------------------------
@dataclass(frozen=True)
class GapReport:
    """Cut-offs tuned at the two noise levels and their values on the n-th system."""

    p_star_f: float
    p_star_v: float
    value_f: ValueEstimate
    value_v: ValueEstimate
    gap: float
    gap_stderr: float
    search_f: CutoffSearch
    search_v: CutoffSearch

    def summary(self) -> dict:
        return {
            "p_star_f": self.p_star_f,
            "p_star_v": self.p_star_v,
            "value_n_at_p_star_f": self.value_f.value_mean,
            "value_n_at_p_star_f_stderr": self.value_f.value_stderr,
            "value_n_at_p_star_v": self.value_v.value_mean,
            "value_n_at_p_star_v_stderr": self.value_v.value_stderr,
            "gap": self.gap,
            "gap_stderr": self.gap_stderr,
        }


def suboptimality_gap(
    spec: SystemSpec,
    stop: StoppingSpec,
    reps: int,
    rng,
    grid: Sequence[float] | None = None,
    search_reps: int | None = None,
    limit_grid_step: float | None = None,
    grid_step: float | None = None,
    threads: int = 1,
) -> GapReport:
    """Loss on the n-th system from tuning the cut-off at ``sqrt(alpha) sigma_v``.

    Cut-offs ``p*_f`` and ``p*_v`` are searched on Brownian posteriors at
    ``sqrt(alpha)/sigma_f`` and ``sqrt(alpha) sigma_v`` (same random numbers
    for both searches); then both cut-off strategies are run on the same
    simulated paths of the n-th system. ``gap = V^n(p*_v) - V^n(p*_f)`` with
    the stderr of the paired difference.
    """
    if not isinstance(stop.cost, Bandit):
        raise ConfigError("the gap report is defined for bandit costs")
    if grid is None:
        grid = np.round(np.arange(1, 50) * 0.02, 10)
    fun = compute_functionals(spec.density, spec.alpha)
    st = as_stream(rng)
    sr = reps if search_reps is None else search_reps
    T = spec.horizon
    step = limit_grid_step if limit_grid_step is not None else T / 4096
    prior = stop.prior(spec.prior.support)
    bs_f = BrownianPosteriorSpec(fun.sigma_prime, prior, T, step)
    bs_v = BrownianPosteriorSpec(math.sqrt(spec.alpha) * fun.sigma_v, prior, T, step)
    lim = st.child(streams.BROWNIAN)
    s_f = search_cutoff_bandit(bs_f, stop, grid, sr, lim)
    s_v = search_cutoff_bandit(bs_v, stop, grid, sr, lim)
    regs = [ContinuationRegion.cutoff(s_f.p_star), ContinuationRegion.cutoff(s_v.p_star)]
    v_f, v_v = value_n_regions(spec, stop, regs, reps, st, grid_step, threads)
    diff = v_v.payoffs - v_f.payoffs
    gse = float(np.std(diff, ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    return GapReport(s_f.p_star, s_v.p_star, v_f, v_v, float(np.mean(diff)), gse, s_f, s_v)
