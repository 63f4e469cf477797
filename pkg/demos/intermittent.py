"""An observer who only sees the system a fraction rho of the time.

With a deterministic busy-time fraction rho the posterior behaves like the
Brownian one at the inflated noise sigma'/sqrt(rho).
"""

from renewal_bayes import (
    BrownianPosteriorSpec,
    Gamma,
    Prior,
    Stream,
    SystemSpec,
    compute_functionals,
    ks_two_sample,
    posterior_marginal_samples,
    sample_posterior_marginal,
)

prior = Prior([-1.0, 1.0])
density = Gamma(1.0)
sp = compute_functionals(density).sigma_prime
reps = 4000
for rho in (1.0, 0.5, 0.25):
    post = posterior_marginal_samples(SystemSpec(5000, 1.0, prior, density, 1.0, rho=rho), 1.0, reps, Stream(4))[:, 1]
    scaled = sample_posterior_marginal(BrownianPosteriorSpec(sp / rho**0.5, prior), 1.0, reps, Stream(5))[:, 1]
    plain = sample_posterior_marginal(BrownianPosteriorSpec(sp, prior), 1.0, reps, Stream(5))[:, 1]
    print(
        f"rho={rho:4.2f}  KS vs sigma'/sqrt(rho): {ks_two_sample(post, scaled).statistic:.4f}"
        f"   KS vs sigma': {ks_two_sample(post, plain).statistic:.4f}"
    )
