"""Mean-one interarrival densities and their noise functionals.

Every family is parametrized so that ``E[v] = 1``; the scale parameter of the
underlying textbook distribution is solved from that constraint. Each model
exposes its pdf, cdf, survival function, the *score statistic*
``x f'(x) / f(x)`` and a sampler. Two functionals drive the limit theory:

``sigma_v``
    the standard deviation of ``v`` (noise level of the diffusion limit of the
    counting process), and
``sigma_f``
    the standard deviation of the score statistic ``f'(v)/f(v) * v``.

The correct noise level for the limit of the posterior processes is
``sqrt(alpha) / sigma_f``; it never exceeds ``sqrt(alpha) * sigma_v`` and the
two coincide exactly on the gamma family.

All closed-form families are of the form ``w1(x) exp(w2(x))`` with ``w1, w2``
sums of power functions, for which the integrability conditions on
``(f'/f)'' x^3`` and ``x f / (1 - F)`` hold with polynomial bounding
functions. Those conditions are documented, not checked at runtime.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate, special

from .errors import DegenerateConditioningError, DomainError, NumericError

__all__ = [
    "DensityModel",
    "Gamma",
    "Weibull",
    "LogNormal",
    "Rayleigh",
    "MaxwellBoltzmann",
    "TruncatedCubic",
    "DensityFunctionals",
    "LemmaRReport",
    "compute_functionals",
    "verify_lemma_r",
    "expect",
    "sample_residual_first",
    "density_from_config",
]

QUAD_EPSABS = 1e-13
QUAD_EPSREL = 1e-12
LOG_TINY = math.log(1e-300)


def _positive(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("density functions are defined for x > 0 only")
    return x


def _nonnegative(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x >= 0)):
        raise DomainError("expected x >= 0")
    return x


def _out(x, value):
    return float(value) if np.ndim(x) == 0 else value


class DensityModel:
    """Base class of the interarrival laws.

    Subclasses implement the vectorized private hooks ``_logpdf``, ``_logsf``,
    ``_logcdf``, ``_score`` (``x f'/f``), ``_curv`` (``x^2 (f'/f)'``) and
    ``_draw``. They accept arrays of positive reals and skip argument checks,
    which makes them suitable for the inner simulation loops.
    """

    family: str = "abstract"

    # -- public, checked interface -------------------------------------------------
    def pdf(self, x):
        x = _positive(x)
        return _out(x, np.exp(self._logpdf(x)))

    def logpdf(self, x):
        x = _positive(x)
        return _out(x, self._logpdf(x))

    def cdf(self, x):
        x = _nonnegative(x)
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = np.exp(self._logcdf(x[pos]))
        return _out(x, out)

    def survival(self, x):
        x = _nonnegative(x)
        out = np.ones_like(x)
        pos = x > 0
        out[pos] = np.exp(self._logsf(x[pos]))
        return _out(x, out)

    sf = survival

    def logsf(self, x):
        x = _nonnegative(x)
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = self._logsf(x[pos])
        return _out(x, out)

    def score_x(self, x):
        """Score statistic ``x f'(x) / f(x)``."""
        x = _positive(x)
        return _out(x, self._score(x))

    def curvature_x2(self, x):
        """``x^2 (f'/f)'(x)``, the integrand of the second score identity."""
        x = _positive(x)
        return _out(x, self._curv(x))

    def sample(self, rng: np.random.Generator, size=None):
        """Draw from the mean-one law."""
        if size is None:
            return float(self._draw(rng, 1)[0])
        return self._draw(rng, size)

    # -- quadrature support ---------------------------------------------------------
    def _breakpoints(self) -> list[float]:
        """Finite breakpoints for piecewise quadrature; the last piece runs to inf."""
        pts = [0.0, 2.0**-12, 2.0**-6, 0.125, 0.25, 0.5, 1.0]
        x = 1.0
        while self._logsf(np.array([x]))[0] > -80.0 and x < 1e12:
            x *= 2.0
            pts.append(x)
        return pts

    def to_config(self) -> dict:
        raise NotImplementedError

    # mean-one families are frozen dataclasses; equality and hashing come from there


# ----------------------------------------------------------------------------------
# closed-form families
# ----------------------------------------------------------------------------------
@dataclass(frozen=True)
class Gamma(DensityModel):
    """Gamma law with shape ``beta`` and rate ``beta`` (mean one)."""

    shape: float
    family: str = field(default="gamma", init=False, repr=False)

    def __post_init__(self):
        if not self.shape > 0:
            raise DomainError("gamma shape must be positive")

    def _logpdf(self, x):
        b = self.shape
        if b == 1.0:
            return -x
        return b * math.log(b) - special.gammaln(b) + (b - 1.0) * np.log(x) - b * x

    def _logsf(self, x):
        if self.shape == 1.0:
            return -x
        with np.errstate(divide="ignore"):
            return np.log(special.gammaincc(self.shape, self.shape * x))

    def _logcdf(self, x):
        if self.shape == 1.0:
            return np.log(-np.expm1(-x))
        with np.errstate(divide="ignore"):
            return np.log(special.gammainc(self.shape, self.shape * x))

    def _score(self, x):
        return (self.shape - 1.0) - self.shape * x

    def _curv(self, x):
        return np.full_like(np.asarray(x, dtype=float), 1.0 - self.shape)

    def _draw(self, rng, size):
        if self.shape == 1.0:
            return rng.standard_exponential(size)
        return rng.standard_gamma(self.shape, size) / self.shape

    def to_config(self):
        return {"family": "gamma", "shape": self.shape}


@dataclass(frozen=True)
class Weibull(DensityModel):
    """Weibull law with shape ``k`` and scale ``1 / Gamma(1 + 1/k)``."""

    shape: float
    family: str = field(default="weibull", init=False, repr=False)

    def __post_init__(self):
        if not self.shape > 0:
            raise DomainError("weibull shape must be positive")

    @cached_property
    def scale(self) -> float:
        return 1.0 / math.gamma(1.0 + 1.0 / self.shape)

    def _logpdf(self, x):
        k, lam = self.shape, self.scale
        z = x / lam
        return math.log(k / lam) + (k - 1.0) * np.log(z) - z**k

    def _logsf(self, x):
        return -((x / self.scale) ** self.shape)

    def _logcdf(self, x):
        return np.log(-np.expm1(-((x / self.scale) ** self.shape)))

    def _score(self, x):
        k = self.shape
        return (k - 1.0) - k * (x / self.scale) ** k

    def _curv(self, x):
        k = self.shape
        return -(k - 1.0) - k * (k - 1.0) * (x / self.scale) ** k

    def _draw(self, rng, size):
        return self.scale * rng.weibull(self.shape, size)

    def to_config(self):
        return {"family": "weibull", "shape": self.shape}


@dataclass(frozen=True)
class LogNormal(DensityModel):
    """Log-normal law with log-sd ``s`` and log-mean ``-s^2/2``."""

    s: float
    family: str = field(default="lognormal", init=False, repr=False)

    def __post_init__(self):
        if not self.s > 0:
            raise DomainError("lognormal log-sd must be positive")

    @property
    def log_mean(self) -> float:
        return -0.5 * self.s**2

    def _z(self, x):
        return (np.log(x) - self.log_mean) / self.s

    def _logpdf(self, x):
        lx = np.log(x)
        z = (lx - self.log_mean) / self.s
        return -lx - math.log(self.s * math.sqrt(2.0 * math.pi)) - 0.5 * z * z

    def _logsf(self, x):
        z = self._z(x)
        far = z > 30.0
        if not np.any(far):
            # erfc is relatively accurate in the upper tail; log_ndtr is only needed near underflow
            return np.log(special.ndtr(-z))
        out = np.empty_like(z)
        out[~far] = np.log(special.ndtr(-z[~far]))
        out[far] = special.log_ndtr(-z[far])
        return out

    def _logcdf(self, x):
        return special.log_ndtr(self._z(x))

    def _score(self, x):
        return -1.0 - (np.log(x) - self.log_mean) / self.s**2

    def _curv(self, x):
        return 1.0 - (1.0 - (np.log(x) - self.log_mean)) / self.s**2

    def _draw(self, rng, size):
        return np.exp(self.log_mean + self.s * rng.standard_normal(size))

    def to_config(self):
        return {"family": "lognormal", "s": self.s}


@dataclass(frozen=True)
class Rayleigh(DensityModel):
    """Rayleigh law with scale ``sqrt(2/pi)``."""

    family: str = field(default="rayleigh", init=False, repr=False)

    @property
    def scale(self) -> float:
        return math.sqrt(2.0 / math.pi)

    def _logpdf(self, x):
        s2 = self.scale**2
        return np.log(x) - math.log(s2) - x * x / (2.0 * s2)

    def _logsf(self, x):
        return -x * x / (2.0 * self.scale**2)

    def _logcdf(self, x):
        return np.log(-np.expm1(-x * x / (2.0 * self.scale**2)))

    def _score(self, x):
        return 1.0 - x * x / self.scale**2

    def _curv(self, x):
        return -1.0 - x * x / self.scale**2

    def _draw(self, rng, size):
        return self.scale * np.sqrt(2.0 * rng.standard_exponential(size))

    def to_config(self):
        return {"family": "rayleigh"}


@dataclass(frozen=True)
class MaxwellBoltzmann(DensityModel):
    """Maxwell-Boltzmann law with scale ``sqrt(pi/8)``."""

    family: str = field(default="maxwell", init=False, repr=False)

    @property
    def scale(self) -> float:
        return math.sqrt(math.pi / 8.0)

    def _logpdf(self, x):
        a = self.scale
        return 0.5 * math.log(2.0 / math.pi) - 3.0 * math.log(a) + 2.0 * np.log(x) - x * x / (2 * a * a)

    def _logsf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(special.gammaincc(1.5, x * x / (2.0 * self.scale**2)))

    def _logcdf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(special.gammainc(1.5, x * x / (2.0 * self.scale**2)))

    def _score(self, x):
        return 2.0 - x * x / self.scale**2

    def _curv(self, x):
        return -2.0 - x * x / self.scale**2

    def _draw(self, rng, size):
        return self.scale * np.sqrt(2.0 * rng.standard_gamma(1.5, size))

    def to_config(self):
        return {"family": "maxwell"}


# ----------------------------------------------------------------------------------
# truncated cubic family
# ----------------------------------------------------------------------------------
CUBIC_C = 3.0**1.5 / (2.0 * math.pi)
_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


def _smootherstep(z):
    """Degree-7 step with vanishing first three derivatives at 0 and 1."""
    z2 = z * z
    s = z2 * z2 * (35.0 - 84.0 * z + 70.0 * z2 - 20.0 * z2 * z)
    s1 = 140.0 * z2 * z * (1.0 - z) ** 3
    s2 = 420.0 * z2 * (1.0 - z) ** 2 * (1.0 - 2.0 * z)
    return s, s1, s2


class _Bump:
    """Unit-mass C-infinity bump ``exp(-1/(1-u^2))`` on ``(center-h, center+h)``."""

    _MASS = 2.0 * integrate.quad(lambda u: math.exp(-1.0 / (1.0 - u * u)), 0.0, 1.0, epsabs=0.0, epsrel=1e-13)[0]

    def __init__(self, center, half_width):
        self.center = center
        self.h = half_width
        self.lo = center - half_width
        self.hi = center + half_width

    def eval(self, x):
        """Value and first two derivatives (zero outside the support)."""
        x = np.asarray(x, dtype=float)
        u = (x - self.center) / self.h
        inside = np.abs(u) < 1.0
        b = np.zeros_like(x)
        b1 = np.zeros_like(x)
        b2 = np.zeros_like(x)
        ui = u[inside]
        w = 1.0 - ui * ui
        val = np.exp(-1.0 / w) / (self._MASS * self.h)
        p1 = -2.0 * ui / (w * w)  # d/du of -1/(1-u^2)
        p2 = -2.0 / (w * w) - 8.0 * ui * ui / (w**3)
        b[inside] = val
        b1[inside] = val * p1 / self.h
        b2[inside] = val * (p1 * p1 + p2) / self.h**2
        return b, b1, b2


@dataclass(frozen=True)
class TruncatedCubic(DensityModel):
    """Heavy-tailed cubic core ``C/(1+x^3)`` cut off at ``y`` with an exponential tail.

    The core density ``C/(1+x^3)`` with ``C = 3^1.5 / (2 pi)`` has unit mass,
    mean one and infinite variance. On ``(0, y)`` the log-density follows the core; over the
    window ``[y, y+1]`` it is blended (degree-7 smootherstep, so the log-density
    is C^3) into ``A - x`` with ``A`` matching the core at ``y``; beyond ``y+1``
    the density is exactly proportional to ``exp(-x)``. The mass and the mean
    lost by the cut-off are restored with two smooth unit-mass bumps, one on
    ``(0.1, 0.5)`` and one on ``(2, 6)``, whose signed weights solve a 2x2
    linear system. The core is untouched on ``(2/3, 1)``.

    As ``y`` grows, ``sigma_v`` grows like ``sqrt(C ln y)`` while ``sigma_f``
    stays bounded away from zero, so ``sigma_v - 1/sigma_f`` is unbounded.
    """

    cutoff: float
    family: str = field(default="truncated_cubic", init=False, repr=False)

    WINDOW = 1.0

    def __post_init__(self):
        if not (self.cutoff >= 8.0 and math.isfinite(self.cutoff)):
            raise DomainError("truncated cubic cutoff must be finite and >= 8")
        if self.cutoff > 1e12:
            raise DomainError("truncated cubic cutoff must not exceed 1e12")

    # -- log-density of the unnormalized body ---------------------------------------
    @property
    def _y(self):
        return float(self.cutoff)

    @cached_property
    def _tail_intercept(self) -> float:
        y = self._y
        return math.log(CUBIC_C) - math.log1p(y**3) + y

    def _body(self, x):
        """log q, (log q)', (log q)'' for the glued body (no bumps)."""
        x = np.asarray(x, dtype=float)
        y, w, A = self._y, self.WINDOW, self._tail_intercept
        x3 = x**3
        lg = math.log(CUBIC_C) - np.log1p(x3)
        lg1 = -3.0 * x * x / (1.0 + x3)
        lg2 = (3.0 * x3 * x - 6.0 * x) / (1.0 + x3) ** 2
        tail = x >= y + w
        win = (x > y) & ~tail
        l0 = np.where(tail, A - x, lg)
        l1 = np.where(tail, -1.0, lg1)
        l2 = np.where(tail, 0.0, lg2)
        if np.any(win):
            xw = x[win]
            s, s1, s2 = _smootherstep((xw - y) / w)
            d0 = (A - xw) - lg[win]
            d1 = -1.0 - lg1[win]
            d2 = -lg2[win]
            l0[win] = lg[win] + s * d0
            l1[win] = lg1[win] + s1 / w * d0 + s * d1
            l2[win] = lg2[win] + s2 / w**2 * d0 + 2.0 * s1 / w * d1 + s * d2
        return l0, l1, l2

    def _body_moment(self, power):
        def g(x):
            return x**power * math.exp(self._body(np.array([x]))[0][0])

        pts = self._nodes_coarse()
        total = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            total += _quad(g, a, b)
        total += _quad(g, pts[-1], math.inf)
        return total

    @cached_property
    def _bumps(self):
        return (_Bump(0.3, 0.2), _Bump(4.0, 2.0))

    @cached_property
    def _weights(self):
        m0 = self._body_moment(0)
        m1 = self._body_moment(1)
        b1, b2 = self._bumps
        mat = np.array([[1.0, 1.0], [b1.center, b2.center]])
        a, c = np.linalg.solve(mat, np.array([1.0 - m0, 1.0 - m1]))
        # positivity of the corrected density on the bump supports
        if a < 0 and abs(a) * float(b1.eval(np.array([b1.center]))[0][0]) > 0.5 * math.exp(
            float(self._body(np.array([b1.hi]))[0][0])
        ):
            raise NumericError("bump correction would make the density negative", {"a": a})
        if c < 0:
            raise NumericError("unexpected negative mean correction", {"c": c})
        return float(a), float(c)

    def _parts(self, x):
        """f, f', f'' of the corrected density."""
        l0, l1, l2 = self._body(x)
        q = np.exp(l0)
        f = q.copy()
        f1 = l1 * q
        f2 = (l2 + l1 * l1) * q
        for wgt, bump in zip(self._weights, self._bumps):
            b, db, d2b = bump.eval(x)
            f += wgt * b
            f1 += wgt * db
            f2 += wgt * d2b
        return f, f1, f2

    def _logpdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        far = x >= self._y + self.WINDOW
        out[far] = self._tail_intercept - x[far]
        near = ~far
        if np.any(near):
            out[near] = np.log(self._parts(x[near])[0])
        return out

    def _score(self, x):
        x = np.asarray(x, dtype=float)
        f, f1, _ = self._parts(x)
        return x * f1 / f

    def _curv(self, x):
        x = np.asarray(x, dtype=float)
        f, f1, f2 = self._parts(x)
        r = f1 / f
        return x * x * (f2 / f - r * r)

    # -- tabulated distribution function --------------------------------------------
    def _nodes_coarse(self):
        y, w = self._y, self.WINDOW
        pts = [0.0, 0.1, 0.3, 0.5, 2.0 / 3.0, 1.0, 2.0, 4.0, 6.0]
        x = 8.0
        while x < y:
            pts.append(x)
            x *= 2.0
        pts += [y, y + w]
        return sorted(set(p for p in pts if p <= y + w))

    @cached_property
    def _table(self):
        y, w = self._y, self.WINDOW
        fine = np.concatenate(
            [
                np.linspace(0.0, 2.0, 81),
                np.geomspace(2.0, max(y, 2.0), max(2, int(math.log(max(y, 2.0) / 2.0) / math.log(1.05)) + 2)),
                np.linspace(y, y + w, 41),
                [0.1, 0.5, 6.0],
            ]
        )
        nodes = np.unique(fine[fine <= y + w])
        pdf = self.pdf
        masses = np.array([_quad(lambda t: float(pdf(t)) if t > 0 else float(pdf(1e-300)), a, b)
                           for a, b in zip(nodes[:-1], nodes[1:])])
        tail = math.exp(self._tail_intercept - (y + w))
        total = masses.sum() + tail
        masses = masses / total
        tail = tail / total
        left = np.concatenate([[0.0], np.cumsum(masses)])
        right = np.concatenate([np.cumsum(masses[::-1])[::-1], [0.0]]) + tail
        return nodes, left, right, tail, total

    def _partial(self, a, b):
        """Vectorized Gauss-Legendre integral of the pdf over [a, b] (inside one cell)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        pts = mid[..., None] + half[..., None] * _GL_X
        vals = np.exp(self._logpdf(np.maximum(pts, 1e-300)))
        return half * (vals @ _GL_W) / self._table[4]

    def _logsf(self, x):
        x = np.asarray(x, dtype=float)
        nodes, left, right, tail, total = self._table
        out = np.empty_like(x)
        far = x >= nodes[-1]
        out[far] = self._tail_intercept - x[far] - math.log(total)
        near = ~far
        if np.any(near):
            xn = x[near]
            k = np.clip(np.searchsorted(nodes, xn, side="right") - 1, 0, len(nodes) - 2)
            sf = right[k + 1] + self._partial(xn, nodes[k + 1])
            with np.errstate(divide="ignore"):
                out[near] = np.log(np.clip(sf, 0.0, 1.0))
        return out

    def _logcdf(self, x):
        x = np.asarray(x, dtype=float)
        nodes, left, right, tail, total = self._table
        out = np.empty_like(x)
        far = x >= nodes[-1]
        out[far] = np.log1p(-np.exp(self._tail_intercept - x[far] - math.log(total)))
        near = ~far
        if np.any(near):
            xn = x[near]
            k = np.clip(np.searchsorted(nodes, xn, side="right") - 1, 0, len(nodes) - 2)
            cdf = left[k] + self._partial(nodes[k], xn)
            with np.errstate(divide="ignore"):
                out[near] = np.log(np.clip(cdf, 0.0, 1.0))
        return out

    def _draw(self, rng, size):
        u = rng.random(size)
        return _invert_logsf(self, np.log1p(-u))

    def _breakpoints(self):
        return self._nodes_coarse()

    def to_config(self):
        return {"family": "truncated_cubic", "cutoff": self.cutoff}


# ----------------------------------------------------------------------------------
# quadrature and functionals
# ----------------------------------------------------------------------------------
def _quad(g, a, b):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(g, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=400)
        except integrate.IntegrationWarning as exc:
            val, err, *_ = integrate.quad(g, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=400, full_output=1)
            if not err < 1e-10:
                raise NumericError("quadrature did not converge", {"a": a, "b": b, "abserr": err, "message": str(exc)})
    return val


def expect(model: DensityModel, h) -> float:
    """``E[h(v)]`` by piecewise adaptive Gauss-Kronrod quadrature.

    ``h`` maps a positive float to a float. The range is split at powers of two
    around the mean, up to the point where the survival function drops below
    ``e^-80``; the last piece runs to infinity.
    """

    def g(x):
        if x <= 0.0:
            return 0.0
        xa = np.array([x])
        lp = model._logpdf(xa)[0]
        if lp < -745.0:
            return 0.0
        return h(x) * math.exp(lp)

    pts = model._breakpoints()
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        total += _quad(g, a, b)
    total += _quad(g, pts[-1], math.inf)
    return total


@dataclass(frozen=True)
class DensityFunctionals:
    sigma_v: float
    sigma_f: float
    sigma_prime: float
    product: float
    mass: float
    mean: float


@dataclass(frozen=True)
class LemmaRReport:
    """Quadrature values of the three score identities."""

    mean_score: float  # E[f'/f v], expected -1
    mean_curvature: float  # E[(f'/f)' v^2], expected 1 - sigma_f^2
    mean_score_v: float  # E[f'/f v^2], expected -2
    sigma_f: float

    @property
    def residuals(self):
        return (
            self.mean_score + 1.0,
            self.mean_curvature - (1.0 - self.sigma_f**2),
            self.mean_score_v + 2.0,
        )


def _scalar(fn):
    return lambda x: float(fn(np.array([x]))[0])


_FUNCTIONAL_CACHE: dict = {}


def _moments(model):
    key = model
    if key not in _FUNCTIONAL_CACHE:
        score = _scalar(model._score)
        mass = expect(model, lambda x: 1.0)
        mean = expect(model, lambda x: x)
        second = expect(model, lambda x: x * x)
        s1 = expect(model, score)
        s2 = expect(model, lambda x: score(x) ** 2)
        _FUNCTIONAL_CACHE[key] = (mass, mean, second, s1, s2)
    return _FUNCTIONAL_CACHE[key]


def compute_functionals(model: DensityModel, alpha: float = 1.0) -> DensityFunctionals:
    """Noise functionals of ``model`` by quadrature.

    >>> f = compute_functionals(Gamma(4.0))
    >>> round(f.sigma_v, 9), round(f.sigma_f, 9)
    (0.5, 2.0)
    """
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    mass, mean, second, s1, s2 = _moments(model)
    var_v = second - mean * mean
    var_f = s2 - s1 * s1
    if not (var_v > 0 and var_f > 0 and math.isfinite(var_v) and math.isfinite(var_f)):
        raise NumericError("non-positive or non-finite variance", {"var_v": var_v, "var_f": var_f})
    sv, sf = math.sqrt(var_v), math.sqrt(var_f)
    return DensityFunctionals(
        sigma_v=sv, sigma_f=sf, sigma_prime=math.sqrt(alpha) / sf, product=sv * sf, mass=mass, mean=mean
    )


def verify_lemma_r(model: DensityModel) -> LemmaRReport:
    """Evaluate ``E[score]``, ``E[(f'/f)' v^2]`` and ``E[f'/f v^2]`` by quadrature."""
    score = _scalar(model._score)
    curv = _scalar(model._curv)
    m_score = expect(model, score)
    m_curv = expect(model, curv)
    m_sv = expect(model, lambda x: score(x) * x)
    return LemmaRReport(m_score, m_curv, m_sv, compute_functionals(model).sigma_f)


# ----------------------------------------------------------------------------------
# residual first interarrival
# ----------------------------------------------------------------------------------
def _invert_logsf(model, target, lower=None):
    """Vectorized bisection solving ``logsf(x) = target`` for x."""
    target = np.asarray(target, dtype=float)
    lo = np.zeros_like(target) if lower is None else np.broadcast_to(np.asarray(lower, float), target.shape).copy()
    hi = np.maximum(lo, 1.0) * 2.0
    for _ in range(200):
        above = model._logsf(hi) > target
        if not np.any(above):
            break
        hi = np.where(above, hi * 2.0, hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        v = model._logsf(np.maximum(mid, 1e-300))
        go_right = v > target
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
        # probability tolerance 1e-12 on the conditional survival, or bracket collapse
        width_p = np.abs(np.exp(model._logsf(np.maximum(lo, 1e-300)) - target) -
                         np.exp(model._logsf(hi) - target))
        if np.all((width_p < 1e-12) | (hi - lo <= 1e-15 * np.maximum(hi, 1e-300))):
            break
    return 0.5 * (lo + hi)


def sample_residual_first(model: DensityModel, mu: float, t_v: float, rng: np.random.Generator, size=None):
    """First interarrival ``v1`` such that ``v1 + t_v ~ (v/mu | v/mu >= t_v)``.

    ``t_v`` is the age (in the system's own time units) of the renewal cycle in
    progress at time zero. The conditional law is sampled by inverting the
    conditional survival function with bisection.
    """
    if not mu > 0:
        raise DomainError("mu must be positive")
    if not t_v >= 0:
        raise DomainError("t_v must be nonnegative")
    n = 1 if size is None else size
    if t_v == 0.0:
        draws = model._draw(rng, n) / mu
    else:
        base = mu * t_v
        log_s0 = float(model._logsf(np.array([base]))[0])
        if not log_s0 > LOG_TINY:
            raise DegenerateConditioningError(
                "survival at the residual age is numerically zero", {"mu": mu, "t_v": t_v, "log_sf": log_s0}
            )
        u = rng.random(n)
        target = log_s0 + np.log1p(-u)
        full = _invert_logsf(model, target, lower=base)
        draws = np.maximum(full - base, 0.0) / mu
    return float(draws[0]) if size is None else draws


# ----------------------------------------------------------------------------------
# configuration
# ----------------------------------------------------------------------------------
_FAMILIES = {
    "gamma": (Gamma, {"shape"}),
    "weibull": (Weibull, {"shape"}),
    "lognormal": (LogNormal, {"s"}),
    "rayleigh": (Rayleigh, set()),
    "maxwell": (MaxwellBoltzmann, set()),
    "truncated_cubic": (TruncatedCubic, {"cutoff"}),
}


def density_from_config(cfg: dict) -> DensityModel:
    """Build a model from ``{"family": name, **params}``."""
    from .errors import ConfigError

    cfg = dict(cfg)
    name = cfg.pop("family", None)
    if name not in _FAMILIES:
        raise ConfigError(f"density.family must be one of {sorted(_FAMILIES)}, got {name!r}")
    cls, keys = _FAMILIES[name]
    unknown = set(cfg) - keys
    missing = keys - set(cfg)
    if unknown:
        raise ConfigError(f"density: unknown keys {sorted(unknown)} for family {name!r}")
    if missing:
        raise ConfigError(f"density: missing keys {sorted(missing)} for family {name!r}")
    try:
        return cls(**{k: float(v) for k, v in cfg.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"density: {exc}") from exc
