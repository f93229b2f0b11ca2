"""Summaries of retained draws."""
from __future__ import annotations

from typing import Sequence

import arviz as az
import numpy as np

from ..imports import DomainError
from ..model_core import Embedding
from .schemas import DrawsLike, PosteriorDraws


def _draw_matrix(draws: DrawsLike) -> np.ndarray:
    if isinstance(draws, PosteriorDraws):
        return draws.draws
    arr = np.asarray(draws, dtype=np.float64)
    if arr.ndim != 2:
        raise DomainError(f"draws must be an (n, K) matrix, got shape {arr.shape}")
    return arr


def posterior_mean(draws: DrawsLike) -> Embedding:
    """Column-wise mean of the draws."""
    arr = _draw_matrix(draws)
    if arr.shape[0] < 1:
        raise DomainError("posterior mean needs at least one draw")
    return Embedding(arr.mean(axis=0))


def posterior_covariance(draws: DrawsLike) -> np.ndarray:
    """Unbiased sample covariance of the draws, symmetrised."""
    arr = _draw_matrix(draws)
    if arr.shape[0] < 2:
        raise DomainError(f"posterior covariance needs at least 2 draws, got {arr.shape[0]}")
    cov = np.atleast_2d(np.cov(arr, rowvar=False, ddof=1))
    return 0.5 * (cov + cov.T)


def chain_effective_sample_sizes(chains: Sequence[DrawsLike]) -> np.ndarray:
    """``(P, K)`` effective sample sizes, one row per chain.

    Each chain is scored on its own with arviz's ``mean`` method (Geyer's
    initial positive sequence over split halves). Chains must hold the same
    number of draws. Chains shorter than 4 draws, and dimensions arviz
    cannot score, report the raw draw count.
    """
    stacked = np.stack([_draw_matrix(c) for c in chains])
    P, n, K = stacked.shape
    if n < 4:
        return np.full((P, K), float(n))
    # one arviz chain, with the chain index as an extra variable dimension
    posterior = az.convert_to_dataset({"z": np.moveaxis(stacked, 0, 1)[None, ...]})
    ess = np.asarray(az.ess(posterior, method="mean")["z"].values, dtype=np.float64)
    return np.where(np.isfinite(ess), ess, float(n))


def effective_sample_size(draws: DrawsLike) -> np.ndarray:
    """Per-dimension effective sample size of one chain."""
    return chain_effective_sample_sizes([draws])[0]
