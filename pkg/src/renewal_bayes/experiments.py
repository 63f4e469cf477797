"""Named experiments.

Each experiment takes a validated configuration (defaults merged with the
user's file), a root seed and a thread count, and returns CSV tables, a
results record and a list of pass/fail assertions. The defaults reproduce the
acceptance protocols at full scale.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import streams
from .analysis import decreasing_within_noise, ks_fluctuation, ks_two_sample, ks_vs_normal
from .brownian import BrownianPosteriorSpec, sample_posterior_marginal
from .density import DensityModel, Gamma, LogNormal, TruncatedCubic, compute_functionals, density_from_config, verify_lemma_r
from .errors import ConfigError
from .posterior import posterior_marginal_samples
from .stopping import (
    Bandit,
    ContinuationRegion,
    General,
    SeqTest,
    StoppingSpec,
    search_interval_seqtest,
    suboptimality_gap,
    value_limit,
    value_n,
)
from .streams import Stream
from .system import Prior, SystemSpec, sample_score_walk

__all__ = ["Experiment", "Assertion", "Result", "EXPERIMENTS", "merge_config"]


@dataclass
class Assertion:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Result:
    tables: dict = field(default_factory=dict)  # name -> (header, rows)
    results: dict = field(default_factory=dict)
    assertions: list = field(default_factory=list)

    def check(self, name: str, passed: bool, detail: str = "") -> None:
        self.assertions.append(Assertion(name, bool(passed), detail))

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)


@dataclass(frozen=True)
class Experiment:
    name: str
    reproduces: str
    runtime: str
    defaults: dict
    run: Callable  # (cfg, root stream, threads) -> Result
    index: int = 0

    def stream(self, seed: int) -> Stream:
        """Experiment stream: child ``index`` of the root seed."""
        return Stream(seed).child(self.index)


# ----------------------------------------------------------------------------------
# configuration helpers
# ----------------------------------------------------------------------------------
_WHOLE = frozenset({"density", "prior"})


def merge_config(defaults: dict, user: dict, where: str = "") -> dict:
    """Overlay ``user`` on ``defaults``; keys absent from ``defaults`` are rejected.

    A default of ``None`` marks an optional key accepting any value. The
    sections in ``_WHOLE`` are replaced as a unit rather than merged.
    """
    out = copy.deepcopy(defaults)
    for key, val in user.items():
        path = f"{where}.{key}" if where else key
        if key not in defaults:
            raise ConfigError(f"unknown key '{path}'")
        d = defaults[key]
        if isinstance(d, dict) and key not in _WHOLE:
            if not isinstance(val, dict):
                raise ConfigError(f"'{path}' must be a section")
            out[key] = merge_config(d, val, path)
        else:
            out[key] = val
    return out


def _density(cfg, where="density") -> DensityModel:
    if not isinstance(cfg, dict):
        raise ConfigError(f"'{where}' must be a table with a 'family' key")
    try:
        return density_from_config(cfg)
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _densities(lst) -> list:
    if not isinstance(lst, list) or not lst:
        raise ConfigError("'densities' must be a nonempty list of tables")
    return [_density(d, f"densities[{i}]") for i, d in enumerate(lst)]


def _num(x, name, positive=False, integer=False):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"'{name}' must be a number")
    if integer and int(x) != x:
        raise ConfigError(f"'{name}' must be an integer")
    if positive and not x > 0:
        raise ConfigError(f"'{name}' must be positive")
    return int(x) if integer else float(x)


def _ns(x, name="system.n"):
    vals = x if isinstance(x, list) else [x]
    if not vals:
        raise ConfigError(f"'{name}' must not be empty")
    out = [_num(v, name, positive=True, integer=True) for v in vals]
    if any(b <= a for a, b in zip(out[:-1], out[1:])):
        raise ConfigError(f"'{name}' must be increasing")
    return out


def _prior(cfg) -> Prior:
    sup = cfg.get("support")
    if not isinstance(sup, list):
        raise ConfigError("'system.prior.support' must be a list")
    probs = cfg.get("probs")
    if probs is not None and not isinstance(probs, list):
        raise ConfigError("'system.prior.probs' must be a list")
    return Prior(sup, probs)


def _system(cfg, density, n) -> SystemSpec:
    s = cfg["system"]
    return SystemSpec(
        n=n,
        alpha=_num(s["alpha"], "system.alpha", positive=True),
        prior=_prior(s["prior"]),
        density=density,
        horizon=_num(s["T"], "system.T", positive=True),
        t_u=_num(s["t_u"], "system.t_u"),
        rho=_num(s["rho"], "system.rho", positive=True),
    )


def _stopping(cfg) -> StoppingSpec:
    s = cfg["stopping"]
    kind = s["kind"]
    if kind == "bandit":
        cost = Bandit(_num(s["c0"], "stopping.c0"), _num(s["cl"], "stopping.cl"))
    elif kind == "seqtest":
        cost = SeqTest(_num(s["a"], "stopping.a"), _num(s["b"], "stopping.b"), _num(s["c"], "stopping.c"))
    elif kind == "general":
        if s.get("grid") is None:
            raise ConfigError("general costs need 'stopping.grid', 'stopping.k' and 'stopping.K'")
        cost = General(s["grid"], s["k"], s["K"])
    else:
        raise ConfigError("'stopping.kind' must be 'bandit', 'seqtest' or 'general'")
    region = s["region"]
    if not isinstance(region, str):
        raise ConfigError("'stopping.region' must be a string such as '(0.3, 1]'")
    return StoppingSpec(_num(s["r"], "stopping.r", positive=True), cost, ContinuationRegion.parse(region), _num(s["pi0"], "stopping.pi0"))


def _grid_step(cfg):
    g = cfg["system"]["grid_step"]
    return None if g is None else _num(g, "system.grid_step", positive=True)


def _reps(cfg) -> int:
    return _num(cfg["reps"], "reps", positive=True, integer=True)


_SYSTEM = {
    "n": 10000,
    "alpha": 1.0,
    "T": 1.0,
    "t": 1.0,
    "t_u": 0.0,
    "rho": 1.0,
    "grid_step": None,
    "prior": {"support": [-1.0, 1.0], "probs": [0.5, 0.5]},
}

_LEMMA_GRID = [
    {"family": "gamma", "shape": 0.5},
    {"family": "gamma", "shape": 1.0},
    {"family": "gamma", "shape": 2.0},
    {"family": "gamma", "shape": 4.0},
    {"family": "weibull", "shape": 0.5},
    {"family": "weibull", "shape": 1.0},
    {"family": "weibull", "shape": 2.0},
    {"family": "weibull", "shape": 3.0},
    {"family": "lognormal", "s": 0.5},
    {"family": "lognormal", "s": 1.0},
    {"family": "lognormal", "s": 1.5},
    {"family": "rayleigh"},
    {"family": "maxwell"},
]


def _label(model: DensityModel) -> str:
    cfg = model.to_config()
    params = ",".join(f"{k}={v:g}" for k, v in cfg.items() if k != "family")
    return f"{cfg['family']}({params})"


def _base(**sections):
    d = {"experiment": "", "seed": 0, "reps": 10000, "threads": 1, "output_dir": None}
    d.update(sections)
    return d


# ----------------------------------------------------------------------------------
# experiments
# ----------------------------------------------------------------------------------
def run_verify_density(cfg, root, threads) -> Result:
    res = Result()
    models = _densities(cfg["densities"])
    pts = [float(x) for x in cfg["fd_points"]]
    rows = []
    for m in models:
        f = compute_functionals(m)
        h = 1e-5
        worst = 0.0
        for x in pts:
            fd = x * (m.logpdf(x * (1 + h)) - m.logpdf(x * (1 - h))) / (2 * x * h)
            sc = m.score_x(x)
            worst = max(worst, abs(fd - sc) / max(1.0, abs(sc)))
        rows.append([_label(m), f.mass, f.mean, f.sigma_v, f.sigma_f, f.product, worst])
        res.check(f"{_label(m)}: |mass-1| < 1e-9", abs(f.mass - 1) < 1e-9, f"{f.mass - 1:.3e}")
        res.check(f"{_label(m)}: |mean-1| < 1e-9", abs(f.mean - 1) < 1e-9, f"{f.mean - 1:.3e}")
        res.check(f"{_label(m)}: sigma_f*sigma_v >= 1 - 1e-9", f.product >= 1 - 1e-9, f"{f.product:.12g}")
        res.check(f"{_label(m)}: score matches finite differences (rel 1e-5)", worst < 1e-5, f"{worst:.3e}")
        if isinstance(m, Gamma):
            res.check(f"{_label(m)}: |sigma_f*sigma_v - 1| <= 1e-7", abs(f.product - 1) <= 1e-7, f"{f.product - 1:.3e}")
        cfgm = m.to_config()
        if cfgm == {"family": "weibull", "shape": 0.5}:
            res.check("weibull(shape=0.5): sigma_f*sigma_v > 1.01", f.product > 1.01, f"{f.product:.6f}")
        if cfgm == {"family": "lognormal", "s": 1.5}:
            res.check("lognormal(s=1.5): sigma_f*sigma_v > 1.9", f.product > 1.9, f"{f.product:.6f}")
    res.tables["functionals"] = (["density", "mass", "mean", "sigma_v", "sigma_f", "product", "score_fd_error"], rows)
    return res


def run_verify_lemma_r(cfg, root, threads) -> Result:
    res = Result()
    rows = []
    for m in _densities(cfg["densities"]):
        rep = verify_lemma_r(m)
        r1, r2, r3 = rep.residuals
        rows.append([_label(m), rep.mean_score, rep.mean_curvature, rep.mean_score_v, rep.sigma_f, r1, r2, r3])
        res.check(f"{_label(m)}: |E[score]+1| < 1e-7", abs(r1) < 1e-7, f"{r1:.3e}")
        res.check(f"{_label(m)}: |E[curvature]-(1-sigma_f^2)| < 1e-6", abs(r2) < 1e-6, f"{r2:.3e}")
        res.check(f"{_label(m)}: |E[score*v]+2| < 1e-6", abs(r3) < 1e-6, f"{r3:.3e}")
    res.tables["lemma_r"] = (
        ["density", "mean_score", "mean_curvature", "mean_score_v", "sigma_f", "res_score", "res_curvature", "res_score_v"],
        rows,
    )
    res.results["triples"] = {r[0]: r[1:4] for r in rows}
    return res


def run_clt_score_walk(cfg, root, threads) -> Result:
    res = Result()
    reps = _reps(cfg)
    n = _num(cfg["system"]["n"], "system.n", positive=True, integer=True)
    t = _num(cfg["system"]["t"], "system.t", positive=True)
    thr = _num(cfg["threshold"], "threshold", positive=True)
    models = _densities(cfg["densities"])
    rows = []
    for k, m in enumerate(models):
        w = sample_score_walk(m, n, t, reps, root.child(k), threads)
        ks = ks_vs_normal(w).statistic
        mean = float(np.mean(w))
        se = float(np.std(w, ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
        rows.append([_label(m), n, t, reps, ks, mean, se, float(np.var(w, ddof=1)) if reps > 1 else 0.0])
        res.check(f"{_label(m)}: KS(W(t), N(0,1)) < {thr:g}", ks < thr, f"{ks:.5f}")
    res.tables["score_walk"] = (["density", "n", "t", "reps", "ks_vs_normal", "mean", "mean_stderr", "variance"], rows)
    return res


def _marginal_table(cfg, root, threads, density, references, ns=None, rho=None):
    """Posterior-marginal KS distances against Brownian references for each n."""
    reps = _reps(cfg)
    s = cfg["system"]
    t = _num(s["t"], "system.t", positive=True)
    ns = _ns(s["n"]) if ns is None else ns
    base = _system(cfg, density, ns[0])
    if rho is not None:
        base = base.with_(rho=rho)
    prior = base.prior
    if prior.size != 2:
        raise ConfigError("marginal comparisons need a two-point prior")
    ref_samples = {
        name: sample_posterior_marginal(BrownianPosteriorSpec(sig, prior, t), t, reps, root)[:, 1]
        for name, sig in references.items()
    }
    rows = []
    for n in ns:
        spec = base.with_(n=n)
        post = posterior_marginal_samples(spec, t, reps, root, threads)[:, 1]
        d = {name: ks_two_sample(post, ref).statistic for name, ref in ref_samples.items()}
        rows.append((n, d, post))
    return rows, reps


def run_convergence(cfg, root, threads, equality=False) -> Result:
    res = Result()
    dens = _density(cfg["density"])
    alpha = _num(cfg["system"]["alpha"], "system.alpha", positive=True)
    f = compute_functionals(dens, alpha)
    refs = {"sigma_prime": f.sigma_prime, "sigma_v": math.sqrt(alpha) * f.sigma_v}
    thr = _num(cfg["threshold"], "threshold", positive=True)
    rows, reps = _marginal_table(cfg, root, threads, dens, refs)
    noise = ks_fluctuation(reps)
    table = [[n, d["sigma_prime"], d["sigma_v"], float(np.mean(p)), reps] for n, d, p in rows]
    res.tables["convergence"] = (["n", "ks_sigma_prime", "ks_sigma_v", "mean_posterior", "reps"], table)
    res.results.update(
        sigma_prime=f.sigma_prime, sigma_v_ref=refs["sigma_v"], sigma_f=f.sigma_f, sigma_v=f.sigma_v, ks_noise=noise
    )
    last = rows[-1][1]
    dp, dv = last["sigma_prime"], last["sigma_v"]
    if equality:
        res.check(f"KS vs sigma' < {thr:g} at largest n", dp < thr, f"{dp:.5f}")
        res.check(f"KS vs sqrt(alpha)*sigma_v < {thr:g} at largest n", dv < thr, f"{dv:.5f}")
        ratio = max(dp, dv) / max(min(dp, dv), 1e-300)
        res.check("the two distances within a factor 2", ratio <= 2.0, f"ratio {ratio:.4f}")
    else:
        seq = [d["sigma_prime"] for _, d, _ in rows]
        res.check(
            "KS vs sigma' decreasing in n (one inversion within 2x noise allowed)",
            decreasing_within_noise(seq, 2 * noise, 1),
            " ".join(f"{x:.5f}" for x in seq),
        )
        res.check(f"KS vs sigma' < {thr:g} at largest n", dp < thr, f"{dp:.5f}")
        res.check("KS vs sqrt(alpha)*sigma_v > 3x KS vs sigma'", dv > 3 * dp, f"{dv:.5f} vs {dp:.5f}")
    return res


def run_sigma_gap(cfg, root, threads) -> Result:
    res = Result()
    ys = [_num(y, "cutoffs", positive=True) for y in cfg["cutoffs"]]
    if any(b <= a for a, b in zip(ys[:-1], ys[1:])):
        raise ConfigError("'cutoffs' must be increasing")
    rows = []
    for y in ys:
        m = TruncatedCubic(y)
        f = compute_functionals(m)
        rows.append([y, f.sigma_v, f.sigma_f, f.sigma_v - 1.0 / f.sigma_f, f.mass, f.mean])
    gaps = [r[3] for r in rows]
    res.tables["sigma_gap"] = (["cutoff", "sigma_v", "sigma_f", "gap", "mass", "mean"], rows)
    res.check("sigma_v - 1/sigma_f strictly increasing in the cutoff", all(b > a for a, b in zip(gaps[:-1], gaps[1:])))
    res.check("sigma_v - 1/sigma_f > 3 at the largest cutoff", gaps[-1] > 3.0, f"{gaps[-1]:.6f}")
    for r in rows:
        res.check(f"cutoff {r[0]:g}: mass and mean equal 1 (1e-9)", abs(r[4] - 1) < 1e-9 and abs(r[5] - 1) < 1e-9)
    return res


def run_intermittent(cfg, root, threads) -> Result:
    res = Result()
    dens = _density(cfg["density"])
    s = cfg["system"]
    alpha = _num(s["alpha"], "system.alpha", positive=True)
    rho = _num(s["rho"], "system.rho", positive=True)
    f = compute_functionals(dens, alpha)
    refs = {"sigma_prime_over_sqrt_rho": f.sigma_prime / math.sqrt(rho), "sigma_prime": f.sigma_prime}
    thr = _num(cfg["threshold"], "threshold", positive=True)
    rows, reps = _marginal_table(cfg, root, threads, dens, refs, rho=rho)
    res.tables["intermittent"] = (
        ["n", "rho", "ks_sigma_prime_over_sqrt_rho", "ks_sigma_prime", "reps"],
        [[n, rho, d["sigma_prime_over_sqrt_rho"], d["sigma_prime"], reps] for n, d, _ in rows],
    )
    d = rows[-1][1]
    a, b = d["sigma_prime_over_sqrt_rho"], d["sigma_prime"]
    res.check(f"KS vs sigma'/sqrt(rho) < {thr:g}", a < thr, f"{a:.5f}")
    res.check("KS vs sigma' > 3x KS vs sigma'/sqrt(rho)", b > 3 * a, f"{b:.5f} vs {a:.5f}")
    return res


def _limit_step(cfg, T):
    st = cfg["stopping"]["limit_grid_step"]
    return T / 4096 if st is None else _num(st, "stopping.limit_grid_step", positive=True)


def run_stopping_convergence(cfg, root, threads) -> Result:
    res = Result()
    dens = _density(cfg["density"])
    stop = _stopping(cfg)
    reps = _reps(cfg)
    ns = _ns(cfg["system"]["n"])
    spec0 = _system(cfg, dens, ns[0])
    grid_step = _grid_step(cfg)
    f = compute_functionals(dens, spec0.alpha)
    T = spec0.horizon
    bspec = BrownianPosteriorSpec(f.sigma_prime, stop.prior(spec0.prior.support), T, _limit_step(cfg, T))
    vl = value_limit(bspec, stop, reps, root)
    rows = []
    last = None
    for n in ns:
        vn = value_n(spec0.with_(n=n), stop, reps, root, grid_step, threads)
        joint = math.hypot(vn.value_stderr, vl.value_stderr)
        ks = ks_two_sample(vn.exit_times, vl.exit_times).statistic
        rows.append([n, vn.value_mean, vn.value_stderr, vl.value_mean, vl.value_stderr, vn.value_mean - vl.value_mean, joint, ks, vn.frac_never_stopped_by_T, vn.tail_bound])
        last = (vn, joint, ks)
    res.tables["stopping_convergence"] = (
        ["n", "value_n", "value_n_stderr", "value_limit", "value_limit_stderr", "difference", "joint_stderr", "ks_exit_time", "frac_never_stopped_n", "tail_bound"],
        rows,
    )
    res.results["value_limit"] = vl.summary()
    vn, joint, ks = last
    diff = abs(vn.value_mean - vl.value_mean)
    res.check("|value_n - value_limit| within 3 joint stderr at largest n", diff <= 3 * joint, f"{diff:.5f} vs 3*{joint:.5f}")
    res.check("exit-time KS (truncated at T) < 0.05 at largest n", ks < 0.05, f"{ks:.5f}")
    diffs = [abs(r[5]) for r in rows]
    res.results["abs_differences"] = diffs
    res.results["abs_differences_decreasing_within_noise"] = decreasing_within_noise(diffs, 2 * joint, len(diffs))
    return res


def run_bandit_gap(cfg, root, threads) -> Result:
    res = Result()
    dens = _density(cfg["density"])
    stop = _stopping(cfg)
    if not isinstance(stop.cost, Bandit):
        raise ConfigError("bandit-gap needs 'stopping.kind = \"bandit\"'")
    reps = _reps(cfg)
    n = _ns(cfg["system"]["n"])[-1]
    spec = _system(cfg, dens, n)
    step = _num(cfg["stopping"]["cutoff_step"], "stopping.cutoff_step", positive=True)
    grid = np.round(np.arange(1, int(round(1 / step))) * step, 12)
    sr = cfg["stopping"]["search_reps"]
    sr = reps if sr is None else _num(sr, "stopping.search_reps", positive=True, integer=True)
    rep = suboptimality_gap(
        spec, stop, reps, root, grid, sr, _limit_step(cfg, spec.horizon), _grid_step(cfg), threads
    )
    res.tables["value_curves"] = (
        ["cutoff", "value_sigma_prime", "stderr_sigma_prime", "value_sigma_v", "stderr_sigma_v"],
        [[p, a, b, c, d] for p, a, b, c, d in zip(grid, rep.search_f.values, rep.search_f.stderr, rep.search_v.values, rep.search_v.stderr)],
    )
    res.tables["gap"] = (
        ["p_star_f", "p_star_v", "value_n_f", "stderr_f", "value_n_v", "stderr_v", "gap", "gap_stderr"],
        [[rep.p_star_f, rep.p_star_v, rep.value_f.value_mean, rep.value_f.value_stderr, rep.value_v.value_mean, rep.value_v.value_stderr, rep.gap, rep.gap_stderr]],
    )
    res.results.update(rep.summary())
    steps = abs(rep.p_star_v - rep.p_star_f) / step
    res.check("p*_f and p*_v differ by at least 2 grid steps", steps >= 2 - 1e-9, f"{rep.p_star_f:g} vs {rep.p_star_v:g}")
    res.check("gap >= -2 stderr", rep.gap >= -2 * rep.gap_stderr, f"{rep.gap:.5f} +- {rep.gap_stderr:.5f}")
    res.check("gap > 2 stderr", rep.gap > 2 * rep.gap_stderr, f"{rep.gap:.5f} +- {rep.gap_stderr:.5f}")
    return res


def run_seqtest_search(cfg, root, threads) -> Result:
    res = Result()
    dens = _density(cfg["density"])
    stop = _stopping(cfg)
    if not isinstance(stop.cost, SeqTest):
        raise ConfigError("seqtest-search needs 'stopping.kind = \"seqtest\"'")
    reps = _reps(cfg)
    n = _ns(cfg["system"]["n"])[-1]
    spec = _system(cfg, dens, n)
    T = spec.horizon
    f = compute_functionals(dens, spec.alpha)
    gs = _grid_step(cfg)
    q1 = [float(x) for x in cfg["stopping"]["q1"]]
    q2 = [float(x) for x in cfg["stopping"]["q2"]]
    sr = cfg["stopping"]["search_reps"]
    sr = reps if sr is None else _num(sr, "stopping.search_reps", positive=True, integer=True)
    bspec = BrownianPosteriorSpec(f.sigma_prime, stop.prior(spec.prior.support), T, _limit_step(cfg, T))
    srch = search_interval_seqtest(bspec, stop, q1, q2, sr, root.child(streams.BROWNIAN))
    rows = [[a, b, srch.values[i, j], srch.stderr[i, j]] for i, a in enumerate(q1) for j, b in enumerate(q2)]
    res.tables["value_surface"] = (["q1", "q2", "value", "stderr"], rows)
    best = stop.with_region(ContinuationRegion.interval(srch.q1_star, srch.q2_star))
    vl = value_limit(bspec, best, reps, root)
    vn = value_n(spec, best, reps, root, gs, threads)
    joint = math.hypot(vl.value_stderr, vn.value_stderr)
    diff = vn.value_mean - vl.value_mean
    res.tables["validation"] = (
        ["q1_star", "q2_star", "value_limit", "value_limit_stderr", "value_n", "value_n_stderr", "joint_stderr", "ks_exit_time"],
        [[srch.q1_star, srch.q2_star, vl.value_mean, vl.value_stderr, vn.value_mean, vn.value_stderr, joint, ks_two_sample(vn.exit_times, vl.exit_times).statistic]],
    )
    res.results.update(q1_star=srch.q1_star, q2_star=srch.q2_star, value_limit=vl.summary(), value_n=vn.summary())
    res.check("|value_n - value_limit| within 3 joint stderr at the searched interval", abs(diff) <= 3 * joint, f"{diff:.5f} vs 3*{joint:.5f}")
    c = stop.cost
    if c.a == c.b and stop.pi0 == 0.5:
        skew = srch.q1_star + srch.q2_star - 1.0
        res.check("symmetric problem: |q1* + q2* - 1| <= 0.1", abs(skew) <= 0.1, f"{skew:+.3f}")
    return res


def _exp(name, reproduces, runtime, defaults, run):
    return Experiment(name, reproduces, runtime, defaults, run)


_BANDIT = {
    "kind": "bandit",
    "r": 1.0,
    "c0": 1.0,
    "cl": -1.0,
    "a": None,
    "b": None,
    "c": None,
    "grid": None,
    "k": None,
    "K": None,
    "region": "(0.3, 1]",
    "pi0": 0.5,
    "limit_grid_step": None,
    "cutoff_step": 0.02,
    "search_reps": None,
    "q1": None,
    "q2": None,
}


def _sys(**kw):
    d = copy.deepcopy(_SYSTEM)
    for k, v in kw.items():
        d[k] = v
    return d


def _stop(**kw):
    d = copy.deepcopy(_BANDIT)
    d.update(kw)
    return d


_REGISTRY = [
        _exp(
            "verify-density",
            "Model checks of the base densities",
            "seconds",
            _base(densities=_LEMMA_GRID, fd_points=[0.1, 0.5, 1.0, 2.0, 10.0]),
            run_verify_density,
        ),
        _exp("verify-lemma-r", "Score identities of the base densities", "seconds", _base(densities=_LEMMA_GRID), run_verify_lemma_r),
        _exp(
            "clt-score-walk",
            "Central limit behaviour of the score walk",
            "minutes",
            _base(
                densities=[{"family": "gamma", "shape": 1.0}, {"family": "lognormal", "s": 1.0}],
                system=_sys(),
                threshold=0.03,
            ),
            run_clt_score_walk,
        ),
        _exp(
            "convergence-main",
            "Main Theorem",
            "minutes",
            _base(density={"family": "lognormal", "s": 1.5}, system=_sys(n=[100, 1000, 10000]), threshold=0.05),
            lambda c, r, t: run_convergence(c, r, t, equality=False),
        ),
        _exp(
            "gamma-equality",
            "Gamma equality case",
            "minutes",
            _base(density={"family": "gamma", "shape": 1.0}, system=_sys(n=[100, 1000, 10000]), threshold=0.04),
            lambda c, r, t: run_convergence(c, r, t, equality=True),
        ),
        _exp(
            "sigma-gap",
            "Unbounded noise gap",
            "seconds",
            _base(cutoffs=[10.0, 100.0, 1e3, 1e4, 1e6, 1e8, 1e10, 1e12]),
            run_sigma_gap,
        ),
        _exp(
            "intermittent",
            "Intermittent observation",
            "minutes",
            _base(density={"family": "gamma", "shape": 1.0}, system=_sys(rho=0.25), threshold=0.05),
            run_intermittent,
        ),
        _exp(
            "stopping-convergence",
            "Convergence of first-exit strategies",
            "several minutes",
            _base(
                density={"family": "gamma", "shape": 1.0},
                system=_sys(n=[100, 1000, 10000], T=8.0, prior={"support": [0.0, 2.0], "probs": None}),
                stopping=_stop(),
            ),
            run_stopping_convergence,
        ),
        _exp(
            "bandit-gap",
            "Remark on p*_v vs p*_f",
            "several minutes",
            _base(
                density={"family": "lognormal", "s": 1.5},
                system=_sys(T=8.0, prior={"support": [0.0, 2.0], "probs": None}),
                stopping=_stop(),
            ),
            run_bandit_gap,
        ),
        _exp(
            "seqtest-search",
            "Sequential testing search",
            "minutes",
            _base(
                reps=4000,
                density={"family": "lognormal", "s": 1.0},
                system=_sys(T=8.0, prior={"support": [0.0, 2.0], "probs": None}),
                stopping=_stop(
                    kind="seqtest",
                    c0=None,
                    cl=None,
                    a=1.0,
                    b=1.0,
                    c=1.0,
                    region="(0, 1)",
                    q1=[round(0.02 * i, 10) for i in range(1, 25)],
                    q2=[round(0.02 * i, 10) for i in range(26, 50)],
                    limit_grid_step=None,
                ),
            ),
            run_seqtest_search,
        ),
]

EXPERIMENTS = {e.name: Experiment(e.name, e.reproduces, e.runtime, e.defaults, e.run, i + 1) for i, e in enumerate(_REGISTRY)}
