"""Which noise level does a renewal observer see in the diffusion limit?

Two candidates are tabulated for several interarrival laws: the naive
diffusion noise sqrt(alpha)*sigma_v, read off the arrival count, and
sigma' = sqrt(alpha)/sigma_f, set by the score of the interarrival density.
They agree for gamma laws only. Then the posterior at t=1 on a LogNormal
system is compared against Brownian posteriors at both noise levels.

Run with ``python3 demos/noise_levels.py`` (about half a minute).
"""

import numpy as np

from renewal_bayes import (
    BrownianPosteriorSpec,
    Gamma,
    LogNormal,
    Prior,
    Stream,
    SystemSpec,
    TruncatedCubic,
    Weibull,
    compute_functionals,
    ks_two_sample,
    posterior_marginal_samples,
    sample_posterior_marginal,
)

print(f"{'density':>24} {'sigma_v':>9} {'1/sigma_f':>10} {'product':>9}")
for m in [Gamma(0.5), Gamma(3.0), Weibull(0.5), Weibull(2.0), LogNormal(1.0), LogNormal(1.5), TruncatedCubic(1e6)]:
    f = compute_functionals(m)
    print(f"{str(m):>24} {f.sigma_v:9.4f} {1 / f.sigma_f:10.4f} {f.product:9.4f}")

prior = Prior([-1.0, 1.0])
density = LogNormal(1.5)
fun = compute_functionals(density)
reps = 4000
refs = {
    "sigma'": sample_posterior_marginal(BrownianPosteriorSpec(fun.sigma_prime, prior), 1.0, reps, Stream(1))[:, 1],
    "sigma_v": sample_posterior_marginal(BrownianPosteriorSpec(fun.sigma_v, prior), 1.0, reps, Stream(1))[:, 1],
}
print(f"\nKS distance of the posterior on {{1}} at t=1, {density}, {reps} replications")
for n in (100, 1000, 10000):
    post = posterior_marginal_samples(SystemSpec(n, 1.0, prior, density, 1.0), 1.0, reps, Stream(2))[:, 1]
    row = "  ".join(f"vs {k}: {ks_two_sample(post, r).statistic:.4f}" for k, r in refs.items())
    print(f"n={n:>6}  {row}")
print(f"5% fluctuation level: {1.358 * np.sqrt(2 / reps):.4f}")
