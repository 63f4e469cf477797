"""Distribution distances and Monte-Carlo diagnostics.

Limit theorems become finite checks here: marginals at a fixed time are
compared with Kolmogorov-Smirnov distances, martingale properties with
z-scores, and convergence in ``n`` with a monotone-trend test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr

from .errors import DomainError

__all__ = [
    "KsReport",
    "ks_two_sample",
    "ks_vs_normal",
    "ks_fluctuation",
    "MartingaleCheck",
    "martingale_check",
    "ConvergenceRow",
    "convergence_table",
    "decreasing_within_noise",
]

KS_COEF_005 = 1.358


@dataclass(frozen=True)
class KsReport:
    statistic: float
    n_x: int
    n_y: int | None
    critical_005: float
    reject_at_005: bool
    distance_curve: list | None = field(default=None, repr=False)


def _sample(x) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("empty sample")
    if np.any(np.isnan(x)):
        raise DomainError("sample contains NaN")
    return x


def ks_two_sample(xs, ys) -> KsReport:
    """Two-sample Kolmogorov-Smirnov statistic ``sup |F_x - F_y|``.

    Ties are handled exactly: both empirical cdfs are evaluated at every
    distinct value of the pooled sample.
    """
    x = np.sort(_sample(xs))
    y = np.sort(_sample(ys))
    pts = np.concatenate([x, y])
    fx = np.searchsorted(x, pts, side="right") / len(x)
    fy = np.searchsorted(y, pts, side="right") / len(y)
    d = float(np.max(np.abs(fx - fy)))
    crit = KS_COEF_005 * math.sqrt((len(x) + len(y)) / (len(x) * len(y)))
    return KsReport(d, len(x), len(y), crit, d > crit)


def ks_vs_normal(xs) -> KsReport:
    """One-sample Kolmogorov-Smirnov statistic against the standard normal."""
    x = np.sort(_sample(xs))
    m = len(x)
    cdf = ndtr(x)
    up = np.arange(1, m + 1) / m - cdf
    down = cdf - np.arange(m) / m
    d = float(max(up.max(), down.max()))
    crit = KS_COEF_005 / math.sqrt(m)
    return KsReport(d, m, None, crit, d > crit)


def ks_fluctuation(m: int, k: int | None = None) -> float:
    """5% critical value of the two-sample statistic for sizes ``m`` and ``k``."""
    k = m if k is None else k
    return KS_COEF_005 * math.sqrt((m + k) / (m * k))


@dataclass(frozen=True)
class MartingaleCheck:
    mean: float
    expected: float
    stderr: float
    z: float
    passed: bool


def martingale_check(samples, prior_value: float, threshold: float = 3.0) -> MartingaleCheck:
    """z-score of the sample mean against ``prior_value``; pass iff ``|z| < threshold``.

    A sample with zero spread passes exactly when its mean equals the prior
    value.
    """
    x = _sample(samples)
    mean = float(np.mean(x))
    se = float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0
    diff = mean - prior_value
    tiny = 1e-12 * max(1.0, abs(prior_value))
    if se <= tiny:
        # spread-free up to rounding of the mean
        z = 0.0 if abs(diff) <= tiny else math.copysign(math.inf, diff)
    else:
        z = diff / se
    return MartingaleCheck(mean, float(prior_value), se, z, abs(z) < threshold)


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    distances: dict
    reps: int


def convergence_table(
    sample_n: Callable[[int], np.ndarray],
    ns: Sequence[int],
    references: dict,
) -> list[ConvergenceRow]:
    """KS distance between ``sample_n(n)`` and every reference sample, for each ``n``.

    Parameters
    ----------
    sample_n : callable
        ``n -> 1-d sample`` of the quantity studied at system index ``n``.
    ns : sequence of int
        Increasing system indices.
    references : dict
        Name to 1-d reference sample (e.g. Brownian posteriors at two noise
        levels).
    """
    ns = list(ns)
    if any(b <= a for a, b in zip(ns[:-1], ns[1:])):
        raise DomainError("n-list must be increasing")
    rows = []
    for n in ns:
        s = sample_n(n)
        rows.append(
            ConvergenceRow(n, {name: ks_two_sample(s, ref).statistic for name, ref in references.items()}, len(s))
        )
    return rows


def decreasing_within_noise(values: Sequence[float], noise: float, max_inversions: int = 1) -> bool:
    """True if ``values`` decrease, allowing ``max_inversions`` increases of at most ``noise``."""
    inv = 0
    for a, b in zip(values[:-1], values[1:]):
        if b > a:
            if b - a > noise:
                return False
            inv += 1
    return inv <= max_inversions
