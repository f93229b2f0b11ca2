from __future__ import annotations

from typing import Optional

import numpy as np
from scipy.special import softmax

from ..imports import DomainError
from ..em_driver import FitResult
from .schemas import RecoveryScore


def recovery_score(true_embeddings: np.ndarray, fitted: FitResult,
                   true_mu: Optional[np.ndarray] = None) -> RecoveryScore:
    """How closely a fit recovers simulated truth.

    ``rmse_mu`` compares the fitted prior mean with ``true_mu`` (by default
    the mean of the true embeddings); ``tv`` is the total-variation distance
    between ``softmax(true z_i)`` and ``softmax(z_hat_i)`` per instance.
    """
    truth = np.asarray(true_embeddings, dtype=np.float64)
    fitted_z = fitted.embedding_matrix()
    if truth.shape != fitted_z.shape:
        raise DomainError(f"true embeddings {truth.shape} vs fitted {fitted_z.shape}")
    mu = truth.mean(axis=0) if true_mu is None else np.asarray(true_mu, dtype=np.float64)
    if mu.shape != fitted.final_prior.mu.shape:
        raise DomainError(f"true mean has {mu.shape[0]} entries, fitted has {fitted.K}")
    rmse = float(np.sqrt(np.mean((mu - fitted.final_prior.mu) ** 2)))
    tv = 0.5 * np.abs(softmax(truth, axis=1) - softmax(fitted_z, axis=1)).sum(axis=1)
    return RecoveryScore(rmse_mu=rmse, tv=tv)
