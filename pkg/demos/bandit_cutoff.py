"""Cost of tuning a cut-off rule with the wrong noise level.

The cut-off p* is tuned on the Brownian limit twice, once with sigma' and once
with the naive sqrt(alpha)*sigma_v, and both rules are then run on the same
LogNormal system with common random numbers. The rule tuned at sigma' should
do better; the difference is the price of the naive approximation.

Reduced replication counts keep this to a few seconds; the registered
``bandit-gap`` experiment runs the full version.
"""

import numpy as np

from renewal_bayes import (
    Bandit,
    ContinuationRegion,
    LogNormal,
    Prior,
    Stream,
    StoppingSpec,
    SystemSpec,
    suboptimality_gap,
)

spec = SystemSpec(n=1000, alpha=1.0, prior=Prior([0.0, 2.0]), density=LogNormal(1.5), horizon=8.0)
stop = StoppingSpec(r=1.0, cost=Bandit(1.0, -1.0), region=ContinuationRegion.cutoff(0.3), pi0=0.5)
grid = np.round(np.arange(1, 50) * 0.02, 10)
rep = suboptimality_gap(spec, stop, 1500, Stream(3), grid=grid, search_reps=3000)
print(f"p*_f = {rep.p_star_f:.2f}   p*_v = {rep.p_star_v:.2f}")
print(f"V_n(p*_f) = {rep.value_f.value_mean:+.4f}   V_n(p*_v) = {rep.value_v.value_mean:+.4f}")
print(f"gap = {rep.gap:.4f} +- {rep.gap_stderr:.4f}")
