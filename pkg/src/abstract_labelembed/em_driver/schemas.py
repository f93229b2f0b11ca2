"""EM configuration and fit results."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..imports import DEFAULT_EM_ITERS, DEFAULT_MIN_ITERS, DEFAULT_REL_TOL, DomainError
from ..model_core import ClassLabels, Embedding, GaussianPrior
from ..sampler import McmcConfig, PosteriorDraws

# "paper": the prior is re-estimated from the per-instance posterior means
# ("means" is accepted as an alias).
# "full-draws": from every retained draw of the last E-step, pooled per instance.
MStep = Literal["paper", "full-draws"]

M_STEP_ALIASES = {"means": "paper"}


class EmConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_iterations: int = Field(default=DEFAULT_EM_ITERS, ge=1)
    rel_tol: float = Field(default=DEFAULT_REL_TOL, gt=0)
    mcmc: McmcConfig = Field(default_factory=McmcConfig)
    min_iterations: int = Field(default=DEFAULT_MIN_ITERS, ge=0)
    m_step: MStep = "paper"

    @field_validator("m_step", mode="before")
    @classmethod
    def _alias(cls, value):
        return M_STEP_ALIASES.get(value, value) if isinstance(value, str) else value

    @model_validator(mode="after")
    def _ordered(self):
        if self.min_iterations > self.max_iterations:
            raise ValueError(
                f"min_iterations ({self.min_iterations}) exceeds "
                f"max_iterations ({self.max_iterations})")
        return self


class IterationRecord(BaseModel):
    """What one EM iteration did to the prior."""

    model_config = ConfigDict(frozen=True)

    iteration: int
    mu: tuple[float, ...]
    sigma_frobenius: float
    mean_acceptance: float
    mu_delta: float
    sigma_delta: float
    patterns: int
    flagged_chains: int = 0


@dataclass(frozen=True, eq=False)
class FitResult:
    """Output of :func:`~abstract_labelembed.em_driver.fit`.

    Per-instance fields follow the dataset's instance order. Instances that
    share a vote pattern share one chain, so their ``final_draws`` entries
    are the same object.
    """

    labels: ClassLabels
    instance_ids: tuple[str, ...]
    embeddings: tuple[Embedding, ...]
    final_prior: GaussianPrior
    per_instance_cov: np.ndarray
    final_draws: tuple[PosteriorDraws, ...]
    history: tuple[IterationRecord, ...]
    iterations_run: int
    converged: bool
    clamp_events: int = 0
    pattern_index: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return len(self.embeddings)

    @property
    def K(self) -> int:
        return self.final_prior.K

    def embedding_matrix(self) -> np.ndarray:
        return np.stack([e.z for e in self.embeddings])

    def index_of(self, instance_id: str) -> int:
        try:
            return self.instance_ids.index(instance_id)
        except ValueError:
            raise DomainError(f"no instance {instance_id!r} in this fit") from None
