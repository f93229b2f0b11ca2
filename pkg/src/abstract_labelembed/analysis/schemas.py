"""Result records for post-fit analytics.

Matrices live in frozen dataclasses; small tallies are pydantic models so
they dump straight to JSON.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


@dataclass(frozen=True, eq=False)
class CorrelationReport:
    corr: np.ndarray
    std: np.ndarray
    n_instances: int
    n_draw_slices: int


@dataclass(frozen=True, eq=False)
class PcaResult:
    """Biplot coordinates.

    ``components`` holds the two leading unit eigenvectors as columns;
    ``loadings`` are those columns scaled by the square roots of their
    eigenvalues.
    """

    scores: np.ndarray
    loadings: np.ndarray
    explained_variance_ratio: np.ndarray
    center: np.ndarray
    components: np.ndarray
    scaled: bool = False
    groups: Optional[tuple[str, ...]] = None


class EllipseSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    group: str
    center: tuple[float, float]
    axes: tuple[float, float]
    angle: float
    coverage: float = Field(gt=0, lt=1)
    size: int = Field(ge=3)


class MajorityVote(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int
    tie: bool


class AgreementStats(BaseModel):
    model_config = ConfigDict(frozen=True)

    full_agreement_fraction: float
    distinct_pattern_count: int
    majority_counts: tuple[int, ...]
    tie_count: int = 0


class DatasetOverview(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_instances: int
    n_classes: int
    distinct_patterns: int
    j_min: int
    j_max: int
    total_votes: int


class ClassProfile(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    votes: int
    z: float
    softmax: float
    q05: float
    q50: float
    q95: float


class EmbeddingProfile(BaseModel):
    """One instance's votes beside its embedding and draw spread, per class."""

    model_config = ConfigDict(frozen=True)

    instance_id: str
    classes: tuple[ClassProfile, ...]
    acceptance_rate: float
    cov_trace: float
