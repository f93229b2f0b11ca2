"""Stochastic EM over a whole dataset.

Each iteration samples every distinct vote pattern under the current prior,
takes the posterior means, and re-estimates the prior from them. Chains for
iteration ``m`` are seeded by ``(seed, m, *counts)``; the first iteration
starts every chain at zero, later ones at the pattern's previous estimate.
"""
from __future__ import annotations

import logging

import numpy as np

from ..imports import (
    CONVERGENCE_WINDOW, DEFAULT_WORKERS, DomainError, NumericalError,
)
from ..model_core import (
    AnnotationDataset, ClampCounter, Embedding, GaussianPrior, VoteCounts, counting_clamps,
)
from ..sampler import (
    McmcConfig, chain_effective_sample_sizes, posterior_covariance, posterior_mean,
)
from .estep import sample_patterns
from .prior import init_prior, pooled_prior, update_prior
from .schemas import EmConfig, FitResult, IterationRecord

logger = logging.getLogger("abstract_labelembed.em_driver")


def _relative_change(new: np.ndarray, old: np.ndarray) -> float:
    return float(np.linalg.norm(new - old) / max(1.0, float(np.linalg.norm(old))))


def fit(dataset: AnnotationDataset, config: EmConfig | None = None,
        workers: int = DEFAULT_WORKERS) -> FitResult:
    """Fit embeddings and the prior to ``dataset``.

    ``workers`` only changes how the E-step is scheduled; the result is
    identical for any value.
    """
    config = config or EmConfig()
    with counting_clamps() as counter:
        return _fit(dataset, config, workers, counter)


def _log_effective_sample_sizes(draws, patterns: np.ndarray, n_retained: int) -> None:
    ess = chain_effective_sample_sizes(draws)
    worst = int(np.argmin(ess.min(axis=1)))
    logger.info("final E-step: effective sample size %.0f to %.0f of %d draws "
                "(lowest for votes %s)", ess.min(), ess.max(), n_retained,
                patterns[worst].tolist())
    if logger.isEnabledFor(logging.DEBUG):
        for row, e in zip(patterns, ess):
            logger.debug("votes %s: effective sample size %s", row.tolist(),
                         np.round(e, 1).tolist())


def _fit(dataset: AnnotationDataset, config: EmConfig, workers: int,
         counter: ClampCounter) -> FitResult:
    if dataset.n < 2:
        raise DomainError(f"fitting needs at least 2 instances, got {dataset.n}")
    K = dataset.K
    patterns, inverse = dataset.patterns()
    P = patterns.shape[0]
    weights = np.bincount(inverse, minlength=P)
    logger.info("fitting %d instances, %d classes, %d distinct vote patterns "
                "(m-step=%s, seed=%d)", dataset.n, K, P, config.m_step, config.mcmc.seed)

    prior = init_prior(K)
    inits = np.zeros((P, K))
    history: list[IterationRecord] = []
    streak = 0
    converged = False
    draws = None

    for iteration in range(1, config.max_iterations + 1):
        draws = sample_patterns(patterns, prior, inits, config.mcmc,
                                prefix=(iteration,), workers=workers)
        means = np.stack([posterior_mean(d).z for d in draws])
        try:
            if config.m_step == "full-draws":
                new_prior = pooled_prior(draws, weights)
            else:
                new_prior = update_prior(means[inverse])
        except NumericalError as exc:
            raise NumericalError(f"EM iteration {iteration}: {exc}") from exc

        mu_delta = _relative_change(new_prior.mu, prior.mu)
        sigma_delta = _relative_change(new_prior.sigma, prior.sigma)
        acceptance = float(np.mean([d.acceptance_rate for d in draws]))
        flagged = sum(1 for d in draws if d.warning)
        history.append(IterationRecord(
            iteration=iteration,
            mu=tuple(float(v) for v in new_prior.mu),
            sigma_frobenius=float(np.linalg.norm(new_prior.sigma)),
            mean_acceptance=acceptance,
            mu_delta=mu_delta,
            sigma_delta=sigma_delta,
            patterns=P,
            flagged_chains=flagged,
        ))
        logger.info("iteration %d: d_mu=%.3g d_sigma=%.3g acceptance=%.3f patterns=%d",
                    iteration, mu_delta, sigma_delta, acceptance, P)
        if flagged:
            logger.warning("iteration %d: %d of %d chains have acceptance outside "
                           "the expected band", iteration, flagged, P)

        prior = new_prior
        inits = means
        streak = streak + 1 if (mu_delta < config.rel_tol and sigma_delta < config.rel_tol) else 0
        if streak >= CONVERGENCE_WINDOW and iteration >= config.min_iterations:
            converged = True
            break

    _log_effective_sample_sizes(draws, patterns, config.mcmc.n_retained)
    clamps = counter.count
    if clamps:
        logger.warning("embedding entries were clamped %d time(s) during the fit", clamps)
    if not converged:
        logger.info("stopped at max_iterations=%d without meeting rel_tol=%g",
                    config.max_iterations, config.rel_tol)

    pattern_embeddings = [Embedding(m) for m in means]
    pattern_cov = [posterior_covariance(d) if d.n >= 2 else np.zeros((K, K)) for d in draws]
    return FitResult(
        labels=dataset.labels,
        instance_ids=tuple(dataset.ids),
        embeddings=tuple(pattern_embeddings[p] for p in inverse),
        final_prior=prior,
        per_instance_cov=np.stack([pattern_cov[p] for p in inverse]),
        final_draws=tuple(draws[p] for p in inverse),
        history=tuple(history),
        iterations_run=len(history),
        converged=converged,
        clamp_events=clamps,
        pattern_index=inverse,
    )


def embed_new_instance(votes: VoteCounts, prior: GaussianPrior,
                       mcmc: McmcConfig | None = None) -> tuple[Embedding, np.ndarray]:
    """One E-step for a single held-out instance against a frozen prior.

    The chain starts at the prior mean and is seeded by ``(seed, *counts)``.
    """
    mcmc = mcmc or McmcConfig()
    if not isinstance(votes, VoteCounts):
        votes = VoteCounts.of(votes)
    if votes.K != prior.K:
        raise DomainError(f"votes have {votes.K} classes, prior has {prior.K}")
    patterns = votes.as_array()[None, :]
    (draws,) = sample_patterns(patterns, prior, prior.mu[None, :], mcmc)
    if draws.warning:
        logger.warning("acceptance rate %.3f outside the expected band", draws.acceptance_rate)
    return posterior_mean(draws), posterior_covariance(draws)
