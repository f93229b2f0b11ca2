"""The E-step: one Metropolis chain per distinct vote pattern.

Patterns are split into contiguous chunks, one per worker, and each chunk
runs as a batch of lock-step chains. Results are put back by pattern index.
"""
from __future__ import annotations

import contextvars
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

from ..model_core import GaussianPrior, log_posterior_rows
from ..sampler import McmcConfig, PosteriorDraws, chain_seed, run_chains

logger = logging.getLogger("abstract_labelembed.em_driver")


def pattern_seeds(seed: int, patterns: np.ndarray, prefix: Sequence[int] = ()):
    """Chain seed per pattern, keyed on ``prefix`` and the counts themselves."""
    return [chain_seed(seed, (*prefix, *row)) for row in np.asarray(patterns).tolist()]


def sample_patterns(
    patterns: np.ndarray,
    prior: GaussianPrior,
    inits: np.ndarray,
    mcmc: McmcConfig,
    prefix: Sequence[int] = (),
    workers: int = 1,
) -> list[PosteriorDraws]:
    """Draw from the posterior of every pattern under ``prior``."""
    patterns = np.asarray(patterns, dtype=np.int64)
    P = patterns.shape[0]
    seeds = pattern_seeds(mcmc.seed, patterns, prefix)
    chunks = [c for c in np.array_split(np.arange(P), max(1, min(int(workers), P))) if c.size]

    def _run(idx: np.ndarray) -> list[PosteriorDraws]:
        Y = patterns[idx]

        def target(Z: np.ndarray) -> np.ndarray:
            return log_posterior_rows(Z, Y, prior)

        return run_chains(target, inits[idx], [seeds[i] for i in idx], mcmc)

    if len(chunks) == 1:
        results = [_run(chunks[0])]
    else:
        logger.debug("E-step over %d patterns in %d chunks", P, len(chunks))
        # workers run in copies of the caller's context, clamp counter included
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            futures = [pool.submit(contextvars.copy_context().run, _run, c) for c in chunks]
            results = [f.result() for f in futures]

    merged: list[PosteriorDraws] = [None] * P
    for idx, chunk_draws in zip(chunks, results):
        for i, draws in zip(idx, chunk_draws):
            merged[int(i)] = draws
    return merged
