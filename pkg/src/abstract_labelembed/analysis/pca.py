"""Two-component PCA biplots and concentration ellipses."""
from __future__ import annotations

import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy.stats import chi2

from ..imports import DEFAULT_COVERAGE, DomainError
from .schemas import EllipseSpec, PcaResult

logger = logging.getLogger("abstract_labelembed.analysis")

RANK_TOL = 1e-12


def _orient(components: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    out = components.copy()
    for j in range(out.shape[1]):
        lead = int(np.argmax(np.abs(out[:, j])))
        if out[lead, j] < 0:
            out[:, j] = -out[:, j]
    return out


def pca_biplot(embeddings: np.ndarray, groups: Optional[Sequence[str]] = None,
               scale: bool = False) -> PcaResult:
    """Project embeddings onto their two leading principal components.

    Columns are centred; with ``scale=True`` they are also divided by their
    standard deviation (correlation PCA).
    """
    X = np.asarray(embeddings, dtype=np.float64)
    if X.ndim != 2:
        raise DomainError(f"embeddings must be an (n, K) matrix, got shape {X.shape}")
    n, K = X.shape
    if n <= 2 or K < 2:
        raise DomainError(f"a biplot needs n > 2 and K >= 2, got n={n}, K={K}")
    if groups is not None and len(groups) != n:
        raise DomainError(f"{len(groups)} group labels for {n} instances")

    center = X.mean(axis=0)
    centred = X - center
    if scale:
        sd = centred.std(axis=0, ddof=1)
        if np.any(sd == 0):
            raise DomainError("correlation PCA is undefined with a constant dimension")
        centred = centred / sd

    cov = np.atleast_2d(np.cov(centred, rowvar=False, ddof=1))
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    eigvecs = eigvecs[:, order]
    if eigvals[0] <= 0 or eigvals[1] <= RANK_TOL * eigvals[0]:
        raise DomainError("embeddings have rank < 2; a biplot needs two non-degenerate components")

    components = _orient(eigvecs[:, :2])
    return PcaResult(
        scores=centred @ components,
        loadings=components * np.sqrt(eigvals[:2]),
        explained_variance_ratio=eigvals[: min(n, K)] / eigvals.sum(),
        center=center,
        components=components,
        scaled=scale,
        groups=tuple(str(g) for g in groups) if groups is not None else None,
    )


def concentration_ellipse(scores: np.ndarray, coverage: float = DEFAULT_COVERAGE,
                          group: str = "all") -> EllipseSpec:
    """Ellipse holding ``coverage`` of a bivariate normal fitted to ``scores``.

    ``axes`` are the semi-axis lengths, longest first; ``angle`` is the
    leading axis direction in radians, in ``(-pi/2, pi/2]``.
    """
    S = np.asarray(scores, dtype=np.float64)
    if S.ndim != 2 or S.shape[1] != 2:
        raise DomainError(f"scores must be an (m, 2) matrix, got shape {S.shape}")
    if S.shape[0] < 3:
        raise DomainError(f"group {group!r} has {S.shape[0]} points; an ellipse needs 3")
    if not 0.0 < coverage < 1.0:
        raise DomainError(f"coverage must lie in (0, 1), got {coverage!r}")
    cov = np.cov(S, rowvar=False, ddof=1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    if eigvals[1] <= 0 or eigvals[0] <= RANK_TOL * eigvals[1]:
        raise DomainError(f"group {group!r} has a singular score covariance")
    quantile = float(chi2.ppf(coverage, df=2))
    lead = eigvecs[:, 1]
    angle = math.atan2(lead[1], lead[0])
    if angle <= -math.pi / 2:
        angle += math.pi
    elif angle > math.pi / 2:
        angle -= math.pi
    center = S.mean(axis=0)
    return EllipseSpec(
        group=group,
        center=(float(center[0]), float(center[1])),
        axes=(math.sqrt(quantile * eigvals[1]), math.sqrt(quantile * eigvals[0])),
        angle=angle,
        coverage=coverage,
        size=int(S.shape[0]),
    )


def group_ellipses(pca: PcaResult, coverage: float = DEFAULT_COVERAGE) -> list[EllipseSpec]:
    """One ellipse per group of the biplot, in first-appearance order.

    Groups too small or too degenerate for an ellipse are skipped with a
    warning. Without groups, a single ellipse over all scores is returned.
    """
    if pca.groups is None:
        return [concentration_ellipse(pca.scores, coverage, "all")]
    members: dict[str, list[int]] = {}
    for i, g in enumerate(pca.groups):
        members.setdefault(g, []).append(i)
    ellipses = []
    for g, idx in members.items():
        try:
            ellipses.append(concentration_ellipse(pca.scores[idx], coverage, g))
        except DomainError as exc:
            logger.warning("skipping ellipse: %s", exc)
    return ellipses
