"""Forward sampling of ``z -> pi -> votes``.

Instance ``i`` draws from its own generator, spawned from ``SeedSequence(seed)``.
Dirichlet draws go through log-Gamma variates with the shape boost
``Gamma(a) = Gamma(a + 1) * U ** (1 / a)``, kept in log space so shapes far
below 1 neither underflow nor lose mass.
"""
from __future__ import annotations

import logging

import numpy as np
from scipy.special import logsumexp

from ..imports import Z_CLAMP
from ..model_core import AnnotationDataset, Instance, VoteCounts
from .schemas import SimSpec

logger = logging.getLogger("abstract_labelembed.simulate")


def log_dirichlet_draw(rng: np.random.Generator, log_alpha: np.ndarray) -> np.ndarray:
    """``log pi`` for ``pi ~ Dir(exp(log_alpha))``."""
    alpha = np.exp(log_alpha)
    log_g = np.log(rng.standard_gamma(alpha + 1.0)) + np.log(rng.random(alpha.shape[0])) / alpha
    return log_g - logsumexp(log_g)


def sample_dataset(spec: SimSpec) -> tuple[AnnotationDataset, np.ndarray]:
    """Simulated dataset plus the true ``(n, K)`` embeddings behind it."""
    prior = spec.prior()
    labels = spec.labels()
    J = spec.votes_per_instance()
    children = np.random.SeedSequence(spec.seed).spawn(spec.n)
    width = len(str(spec.n))

    truth = np.empty((spec.n, spec.K))
    instances = []
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        z = prior.mu + prior.chol @ rng.standard_normal(spec.K)
        truth[i] = z
        pi = np.exp(log_dirichlet_draw(rng, np.clip(z, -Z_CLAMP, Z_CLAMP)))
        counts = rng.multinomial(J[i], pi / pi.sum())
        instances.append(Instance(
            instance_id=f"sim{i + 1:0{width}d}",
            votes=VoteCounts.of(counts),
        ))
    logger.info("simulated %d instances over %d classes (seed=%d)",
                spec.n, spec.K, spec.seed)
    return AnnotationDataset(labels=labels, instances=tuple(instances)), truth
