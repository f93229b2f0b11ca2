"""Empirical-Bayes estimation of the Gaussian prior."""
from __future__ import annotations

from typing import Sequence, Union

import numpy as np

from ..imports import PRIOR_INIT_VARIANCE, DomainError
from ..model_core import Embedding, GaussianPrior
from ..sampler import PosteriorDraws

EstimatesLike = Union[Sequence[Embedding], np.ndarray]


def init_prior(K: int) -> GaussianPrior:
    """``N(0, 10 I)``, the starting prior of every fit."""
    if int(K) != K or K < 2:
        raise DomainError(f"a prior needs K >= 2 classes, got {K!r}")
    K = int(K)
    return GaussianPrior(mu=np.zeros(K), sigma=PRIOR_INIT_VARIANCE * np.eye(K))


def _estimate_matrix(estimates: EstimatesLike) -> np.ndarray:
    if isinstance(estimates, np.ndarray):
        arr = np.asarray(estimates, dtype=np.float64)
        if arr.ndim != 2:
            raise DomainError(f"estimates must be an (n, K) matrix, got shape {arr.shape}")
        return arr
    rows = [e.z if isinstance(e, Embedding) else np.asarray(e, dtype=np.float64)
            for e in estimates]
    if not rows:
        raise DomainError("no estimates to update the prior from")
    K = rows[0].shape[0]
    if any(r.shape != (K,) for r in rows):
        raise DomainError("estimates have differing lengths")
    return np.stack(rows)


def update_prior(estimates: EstimatesLike) -> GaussianPrior:
    """Maximum-likelihood normal fit to the estimates (divisor ``n``).

    A singular scatter matrix (all estimates equal, or fewer distinct
    estimates than classes) is handled by the jitter policy of
    :class:`GaussianPrior`.
    """
    Z = _estimate_matrix(estimates)
    n = Z.shape[0]
    if n < 2:
        raise DomainError(f"updating the prior needs at least 2 estimates, got {n}")
    if not np.all(np.isfinite(Z)):
        raise DomainError("estimates contain non-finite values")
    mu = Z.mean(axis=0)
    centred = Z - mu
    sigma = centred.T @ centred / n
    return GaussianPrior(mu=mu, sigma=0.5 * (sigma + sigma.T))


def pooled_prior(draws: Sequence[PosteriorDraws], weights: Sequence[int]) -> GaussianPrior:
    """Normal fit to every retained draw, each chain counted ``weights[p]`` times.

    ``draws[p]`` is the chain shared by ``weights[p]`` instances; the result
    equals stacking each instance's draws and fitting with divisor
    ``n_instances * n_draws``.
    """
    if len(draws) != len(weights) or not draws:
        raise DomainError("pooled prior needs one weight per chain")
    w = np.asarray(weights, dtype=np.float64)
    total = float(w.sum()) * draws[0].n
    if total < 2:
        raise DomainError("pooled prior needs at least 2 draws")
    K = draws[0].K
    mu = np.zeros(K)
    for d, weight in zip(draws, w):
        mu += weight * d.draws.sum(axis=0)
    mu /= total
    sigma = np.zeros((K, K))
    for d, weight in zip(draws, w):
        centred = d.draws - mu
        sigma += weight * (centred.T @ centred)
    sigma /= total
    return GaussianPrior(mu=mu, sigma=0.5 * (sigma + sigma.T))
