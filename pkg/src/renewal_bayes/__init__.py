"""Bayesian posterior processes of scaled renewal counting observations."""

__version__ = "0.1.0"

from .errors import ConfigError, DegenerateConditioningError, DomainError, NumericError, SurvivalUnderflowWarning
from .streams import Stream
from .density import (
    DensityModel,
    Gamma,
    LogNormal,
    MaxwellBoltzmann,
    Rayleigh,
    TruncatedCubic,
    Weibull,
    compute_functionals,
    density_from_config,
    sample_residual_first,
    verify_lemma_r,
)
from .system import Prior, SystemSpec, rates, scaled_observed, score_walk, simulate_path
from .posterior import PosteriorPath, log_likelihood, posterior_marginal_samples, posterior_path
from .brownian import BrownianPosteriorSpec, posterior_given_endpoint, rn_density, sample_posterior_marginal
from .stopping import (
    Bandit,
    ContinuationRegion,
    General,
    SeqTest,
    StoppingSpec,
    first_exit,
    search_cutoff_bandit,
    search_interval_seqtest,
    suboptimality_gap,
    value_limit,
    value_n,
)
from .analysis import ks_two_sample, ks_vs_normal, martingale_check
