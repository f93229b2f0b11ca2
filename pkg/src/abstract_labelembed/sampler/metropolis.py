"""Random-walk Metropolis over the embedding posterior.

:func:`run_chains` advances a batch of independent chains in lock-step. Each
chain owns a ``numpy`` generator built from its own ``SeedSequence`` and
draws its proposal noise in blocks whose edges depend only on the step
index, and the target is evaluated row by row, so a chain's output is the
same whether it runs alone or next to a thousand others. That is what lets
the E-step split work across threads without changing a single bit.

During burn-in (``adapt=True``) each chain's proposal scale follows a
Robbins-Monro update on the log scale toward 0.234 acceptance; after
burn-in the scale is frozen.
"""
from __future__ import annotations

import logging
from typing import Callable, Sequence

import numpy as np

from ..imports import NOISE_BLOCK, TARGET_ACCEPTANCE, InitializationError
from ..model_core import Embedding
from .schemas import McmcConfig, PosteriorDraws
from .summaries import effective_sample_size

logger = logging.getLogger("abstract_labelembed.sampler")

RowTarget = Callable[[np.ndarray], np.ndarray]

# Robbins-Monro gain exponent; gain at burn-in step t is (t + 1) ** -ADAPT_DECAY
ADAPT_DECAY = 0.6


def chain_seed(seed: int, spawn_key: Sequence[int] = ()) -> np.random.SeedSequence:
    """The seed sequence of the chain named ``spawn_key`` under run ``seed``."""
    return np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in spawn_key))


class _NoiseStream:
    """Per-chain proposal noise, refilled every ``NOISE_BLOCK`` steps."""

    def __init__(self, seeds: Sequence[np.random.SeedSequence], K: int, total: int):
        self._rngs = [np.random.default_rng(s) for s in seeds]
        self._K = K
        self._total = total
        self._start = -1
        self._normal = self._uniform = None

    def at(self, step: int) -> tuple[np.ndarray, np.ndarray]:
        offset = step % NOISE_BLOCK
        start = step - offset
        if start != self._start:
            size = min(NOISE_BLOCK, self._total - start)
            normal, uniform = [], []
            for rng in self._rngs:
                normal.append(rng.standard_normal((size, self._K)))
                uniform.append(rng.random(size))
            self._normal = np.stack(normal)
            self._uniform = np.stack(uniform)
            self._start = start
        return self._normal[:, offset, :], self._uniform[:, offset]


def _finite_or_reject(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    return np.where(np.isfinite(values), values, -np.inf)


def run_chains(
    target: RowTarget,
    init: np.ndarray,
    seeds: Sequence[np.random.SeedSequence],
    config: McmcConfig,
) -> list[PosteriorDraws]:
    """Run one chain per row of ``init``.

    ``target`` maps a ``(P, K)`` array to ``P`` log-densities and must treat
    rows independently. ``seeds[p]`` drives chain ``p``. Raises
    :class:`InitializationError` if any chain's target is non-finite at its
    starting state.
    """
    state = np.array(init, dtype=np.float64, ndmin=2)
    P, K = state.shape
    if K < 1:
        raise InitializationError("chains need at least one dimension")
    if len(seeds) != P:
        raise InitializationError(f"{len(seeds)} seeds for {P} chains")

    log_p = np.asarray(target(state), dtype=np.float64)
    bad = np.flatnonzero(~np.isfinite(log_p))
    if bad.size:
        raise InitializationError(
            f"target is not finite at the initial state of chain(s) {bad.tolist()[:5]}: "
            f"{log_p[bad[:5]].tolist()}")

    total = config.total_steps
    noise = _NoiseStream(seeds, K, total)
    log_scale = np.full(P, np.log(config.proposal_scale))
    scale = np.exp(log_scale)
    draws = np.empty((P, config.n_retained, K))
    accepted = np.zeros(P, dtype=np.int64)
    kept = 0

    for step in range(total):
        normal, uniform = noise.at(step)
        proposal = state + scale[:, None] * normal
        log_q = _finite_or_reject(target(proposal))
        with np.errstate(divide="ignore", invalid="ignore"):
            log_ratio = log_q - log_p
            accept = np.log(uniform) < log_ratio
        state = np.where(accept[:, None], proposal, state)
        log_p = np.where(accept, log_q, log_p)

        if step < config.burn_in:
            if config.adapt:
                with np.errstate(over="ignore", invalid="ignore"):
                    alpha = np.exp(np.minimum(log_ratio, 0.0))
                alpha = np.where(np.isfinite(alpha), alpha, 0.0)
                gain = (step + 1.0) ** -ADAPT_DECAY
                log_scale = log_scale + gain * (alpha - TARGET_ACCEPTANCE)
                scale = np.exp(log_scale)
            continue

        accepted += accept
        if (step - config.burn_in + 1) % config.thin == 0:
            draws[:, kept, :] = state
            kept += 1

    sampled_steps = config.n_retained * config.thin
    results = []
    for p in range(P):
        results.append(PosteriorDraws(
            draws=draws[p],
            acceptance_rate=accepted[p] / sampled_steps,
            seed_used=int(seeds[p].entropy),
            spawn_key=tuple(seeds[p].spawn_key),
            final_scale=float(scale[p]),
        ))
    return results


def rw_metropolis(
    target: Callable[[np.ndarray], float],
    init: Embedding,
    config: McmcConfig,
) -> PosteriorDraws:
    """Sample from ``exp(target)`` starting at ``init``.

    Performs ``burn_in + n_retained * thin`` proposal steps and keeps every
    ``thin``-th state after burn-in. Same ``config.seed`` gives the same
    draws. An acceptance rate outside the warning band is flagged on the
    result and logged, not raised.
    """
    z0 = init.z if isinstance(init, Embedding) else Embedding(init).z

    def rows(Z: np.ndarray) -> np.ndarray:
        return np.array([target(row) for row in Z], dtype=np.float64)

    (result,) = run_chains(rows, z0[None, :], [chain_seed(config.seed)], config)
    if result.warning:
        logger.warning("acceptance rate %.3f outside the expected band "
                       "(final proposal scale %.3g)", result.acceptance_rate,
                       result.final_scale)
    if logger.isEnabledFor(logging.DEBUG):
        logger.debug("effective sample size per dimension: %s of %d draws",
                     np.round(effective_sample_size(result), 1).tolist(), config.n_retained)
    return result
