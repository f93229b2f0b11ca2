from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..model_core import ClassLabels, GaussianPrior
from ..sampler import UINT64_MAX


class SimSpec(BaseModel):
    """Generative settings: ``n`` instances, ``J`` votes each, ``z ~ N(mu, sigma)``.

    ``J`` is either one count for every instance or a list of ``n`` counts.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    J: Union[int, tuple[int, ...]]
    mu: tuple[float, ...] = Field(min_length=2)
    sigma: tuple[tuple[float, ...], ...]
    seed: int = Field(default=0, ge=0, le=UINT64_MAX)
    class_names: Optional[tuple[str, ...]] = None

    @model_validator(mode="after")
    def _shapes(self):
        K = len(self.mu)
        if len(self.sigma) != K or any(len(row) != K for row in self.sigma):
            raise ValueError(f"sigma must be {K}x{K}")
        if isinstance(self.J, int):
            if self.J < 1:
                raise ValueError("J must be >= 1")
        else:
            if len(self.J) != self.n:
                raise ValueError(f"J lists {len(self.J)} counts for n={self.n} instances")
            if any(j < 1 for j in self.J):
                raise ValueError("every J must be >= 1")
        if self.class_names is not None and len(self.class_names) != K:
            raise ValueError(f"{len(self.class_names)} class names for K={K}")
        return self

    @classmethod
    def isotropic(cls, n: int, J, mu, variance: float = 1.0, seed: int = 0, **kw) -> "SimSpec":
        K = len(mu)
        sigma = tuple(tuple(variance if i == j else 0.0 for j in range(K)) for i in range(K))
        return cls(n=n, J=J, mu=tuple(mu), sigma=sigma, seed=seed, **kw)

    @property
    def K(self) -> int:
        return len(self.mu)

    def votes_per_instance(self) -> list[int]:
        return [self.J] * self.n if isinstance(self.J, int) else list(self.J)

    def prior(self) -> GaussianPrior:
        return GaussianPrior(mu=np.array(self.mu), sigma=np.array(self.sigma))

    def labels(self) -> ClassLabels:
        names = self.class_names or tuple(f"c{k + 1}" for k in range(self.K))
        return ClassLabels(names=names)


@dataclass(frozen=True, eq=False)
class RecoveryScore:
    rmse_mu: float
    tv: np.ndarray

    @property
    def median_tv(self) -> float:
        return float(np.median(self.tv))
