"""Sampler configuration and output records."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..imports import (
    ACCEPTANCE_WARN_BAND, DEFAULT_BURNIN, DEFAULT_MCMC, DEFAULT_PROPOSAL_SCALE,
    DEFAULT_THIN, ROBUST_BURNIN, ROBUST_THIN, DomainError,
)

UINT64_MAX = 2 ** 64 - 1


class McmcConfig(BaseModel):
    """Random-walk Metropolis settings.

    Defaults are 1000 retained, 50 burn-in, thin 20; ``robust()`` gives the
    longer burn-in profile the CLI recommends.
    """

    model_config = ConfigDict(frozen=True)

    n_retained: int = Field(default=DEFAULT_MCMC, ge=1)
    burn_in: int = Field(default=DEFAULT_BURNIN, ge=0)
    thin: int = Field(default=DEFAULT_THIN, ge=1)
    proposal_scale: float = Field(default=DEFAULT_PROPOSAL_SCALE, gt=0)
    adapt: bool = True
    seed: int = Field(default=0, ge=0, le=UINT64_MAX)

    @property
    def total_steps(self) -> int:
        return self.burn_in + self.n_retained * self.thin

    @classmethod
    def robust(cls, **overrides) -> "McmcConfig":
        return cls(**{"burn_in": ROBUST_BURNIN, "thin": ROBUST_THIN, **overrides})


@dataclass(frozen=True, eq=False)
class PosteriorDraws:
    """Retained states of one chain.

    ``seed_used`` is the run seed; ``spawn_key`` identifies the chain's
    stream under it (empty for a stand-alone run).
    """

    draws: np.ndarray
    acceptance_rate: float
    seed_used: int
    spawn_key: tuple[int, ...] = ()
    final_scale: float = 0.0

    def __post_init__(self):
        draws = np.array(self.draws, dtype=np.float64)
        if draws.ndim != 2 or draws.shape[0] < 1 or draws.shape[1] < 1:
            raise DomainError(f"draws must be a non-empty (n, K) matrix, got shape {draws.shape}")
        if not np.all(np.isfinite(draws)):
            raise DomainError("draws contain non-finite values")
        if not 0.0 <= self.acceptance_rate <= 1.0:
            raise DomainError(f"acceptance rate {self.acceptance_rate!r} outside [0, 1]")
        draws.setflags(write=False)
        object.__setattr__(self, "draws", draws)
        object.__setattr__(self, "acceptance_rate", float(self.acceptance_rate))
        object.__setattr__(self, "seed_used", int(self.seed_used))
        object.__setattr__(self, "spawn_key", tuple(int(k) for k in self.spawn_key))

    @property
    def n(self) -> int:
        return int(self.draws.shape[0])

    @property
    def K(self) -> int:
        return int(self.draws.shape[1])

    @property
    def warning(self) -> bool:
        low, high = ACCEPTANCE_WARN_BAND
        return not low <= self.acceptance_rate <= high


DrawsLike = Union[PosteriorDraws, np.ndarray]
