"""A single posterior path, arrival by arrival.

Simulates one LogNormal renewal system with the drift drawn from a two-point
prior and prints the posterior on the upper hypothesis at a few times, with
the jumps at arrivals and the drift between them visible in the left limits.
Writes the full path to ``posterior_path.csv`` in the working directory.
"""

import numpy as np

from renewal_bayes import LogNormal, Prior, Stream, SystemSpec, posterior_path, simulate_path

spec = SystemSpec(n=200, alpha=1.0, prior=Prior([-2.0, 2.0]), density=LogNormal(1.0), horizon=4.0, t_u=0.5)
path = simulate_path(spec, Stream(11))
pp = posterior_path(path, spec, grid_step=1 / 64)
print(f"true drift {path.theta:+g}; {len(path.epochs)} arrivals up to scaled time {spec.horizon:g}")
for t in (0.0, 0.5, 1.0, 2.0, 4.0):
    print(f"  t={t:4.2f}  P(theta=+2) = {pp.at(t)[1]:.4f}")

jumps = pp.probs[pp.arrival, 1] - pp.left_probs[pp.arrival, 1]
between = np.diff(pp.probs[:, 1])[~pp.arrival[1:]]
print(f"mean |jump| at arrivals {np.mean(np.abs(jumps)):.2e}; mean |move| between grid points {np.mean(np.abs(between)):.2e}")
pp.to_csv("posterior_path.csv")
