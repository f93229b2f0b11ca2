"""Correlation of embedding dimensions, and its spread across draws."""
from __future__ import annotations

import logging
from typing import Optional, Sequence

import numpy as np

from ..imports import DomainError
from ..sampler import PosteriorDraws
from .schemas import CorrelationReport

logger = logging.getLogger("abstract_labelembed.analysis")


def _class_name(k: int, labels: Optional[Sequence[str]]) -> str:
    return repr(labels[k]) if labels is not None else f"#{k}"


def correlation_matrix(embeddings: np.ndarray,
                       labels: Optional[Sequence[str]] = None) -> np.ndarray:
    """Pearson correlation across instances for each pair of dimensions."""
    X = np.asarray(embeddings, dtype=np.float64)
    if X.ndim != 2:
        raise DomainError(f"embeddings must be an (n, K) matrix, got shape {X.shape}")
    n, K = X.shape
    if n < 3:
        raise DomainError(f"correlation needs at least 3 instances, got {n}")
    centred = X - X.mean(axis=0)
    scale = np.sqrt(np.sum(centred * centred, axis=0))
    for k in range(K):
        if scale[k] == 0.0:
            raise DomainError(
                f"embedding dimension of class {_class_name(k, labels)} is constant; "
                f"its correlations are undefined")
    corr = (centred.T @ centred) / np.outer(scale, scale)
    corr = np.clip(0.5 * (corr + corr.T), -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return corr


def _weighted_slice_correlation(X: np.ndarray, w: np.ndarray, n: float) -> np.ndarray:
    """Correlation of ``X`` with row ``p`` repeated ``w[p]`` times.

    Constant columns contribute 0 off the diagonal.
    """
    mean = (w @ X) / n
    centred = X - mean
    cross = (centred * w[:, None]).T @ centred
    scale = np.sqrt(np.clip(np.diag(cross), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = cross / np.outer(scale, scale)
    corr[~np.isfinite(corr)] = 0.0
    corr = np.clip(0.5 * (corr + corr.T), -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return corr


def _stack_unique(final_draws: Sequence[PosteriorDraws]) -> tuple[np.ndarray, np.ndarray]:
    """Stack each distinct chain once; returns ``(P, S, K)`` and the inverse index."""
    slot: dict[int, int] = {}
    unique: list[np.ndarray] = []
    inverse = np.empty(len(final_draws), dtype=np.int64)
    for i, d in enumerate(final_draws):
        key = id(d)
        if key not in slot:
            slot[key] = len(unique)
            unique.append(d.draws if isinstance(d, PosteriorDraws) else np.asarray(d, float))
        inverse[i] = slot[key]
    shapes = {u.shape for u in unique}
    if len(shapes) != 1:
        raise DomainError(f"instances have unequal draw counts: {sorted(shapes)}")
    return np.stack(unique), inverse


def correlation_std(final_draws: Sequence[PosteriorDraws]) -> np.ndarray:
    """Entrywise standard deviation (``ddof=1``) of per-slice correlation matrices.

    Slice ``s`` is the matrix of every instance's ``s``-th retained draw.
    Instances sharing a chain object are weighted, not copied.
    """
    if len(final_draws) < 3:
        raise DomainError(f"correlation spread needs at least 3 instances, got {len(final_draws)}")
    stack, inverse = _stack_unique(final_draws)
    P, S, K = stack.shape
    if S < 2:
        raise DomainError("correlation spread needs at least 2 retained draws per instance")
    w = np.bincount(inverse, minlength=P).astype(np.float64)
    n = float(len(final_draws))
    slices = np.empty((S, K, K))
    for s in range(S):
        slices[s] = _weighted_slice_correlation(stack[:, s, :], w, n)
    std = slices.std(axis=0, ddof=1)
    np.fill_diagonal(std, 0.0)
    return std


def correlation_report(embeddings: np.ndarray, final_draws: Sequence[PosteriorDraws],
                       labels: Optional[Sequence[str]] = None) -> CorrelationReport:
    corr = correlation_matrix(embeddings, labels)
    std = correlation_std(final_draws)
    off = std[~np.eye(std.shape[0], dtype=bool)]
    logger.info("correlation spread across draw slices: mean %.3g, max %.3g",
                float(off.mean()) if off.size else 0.0, float(off.max()) if off.size else 0.0)
    return CorrelationReport(
        corr=corr,
        std=std,
        n_instances=int(np.asarray(embeddings).shape[0]),
        n_draw_slices=int(final_draws[0].n),
    )
