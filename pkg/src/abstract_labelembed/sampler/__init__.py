from .schemas import McmcConfig, PosteriorDraws, UINT64_MAX
from .metropolis import chain_seed, run_chains, rw_metropolis
from .summaries import (
    chain_effective_sample_sizes, effective_sample_size, posterior_covariance, posterior_mean,
)

__all__ = [
    "McmcConfig", "PosteriorDraws", "UINT64_MAX",
    "chain_seed", "run_chains", "rw_metropolis",
    "chain_effective_sample_sizes", "effective_sample_size", "posterior_covariance",
    "posterior_mean",
]
