"""Per-instance view: votes next to the embedding and its draw quantiles."""
from __future__ import annotations

import numpy as np
from scipy.special import softmax

from ..imports import DomainError
from ..em_driver import FitResult
from ..model_core import AnnotationDataset
from .schemas import ClassProfile, EmbeddingProfile

QUANTILES = (0.05, 0.50, 0.95)


def embedding_profile(fit: FitResult, dataset: AnnotationDataset,
                      instance_id: str) -> EmbeddingProfile:
    i = fit.index_of(instance_id)
    if dataset.labels != fit.labels:
        raise DomainError("dataset classes do not match the fit's classes")
    if not fit.final_draws:
        raise DomainError("this fit carries no draws; re-run with draws saved")
    inst = next((x for x in dataset.instances if x.instance_id == instance_id), None)
    if inst is None:
        raise DomainError(f"no instance {instance_id!r} in the dataset")

    z = fit.embeddings[i].z
    mass = softmax(z)
    draws = fit.final_draws[i]
    q = np.quantile(draws.draws, QUANTILES, axis=0)
    classes = tuple(
        ClassProfile(
            name=name,
            votes=inst.votes.counts[k],
            z=float(z[k]),
            softmax=float(mass[k]),
            q05=float(q[0, k]),
            q50=float(q[1, k]),
            q95=float(q[2, k]),
        )
        for k, name in enumerate(fit.labels.names)
    )
    return EmbeddingProfile(
        instance_id=instance_id,
        classes=classes,
        acceptance_rate=draws.acceptance_rate,
        cov_trace=float(np.trace(fit.per_instance_cov[i])),
    )
