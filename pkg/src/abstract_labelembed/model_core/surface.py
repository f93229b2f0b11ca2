"""Mean / log-variance surface of the two-class model over a ``(z1, z2)`` grid.

Emitted as a table for external plotting; nothing here draws.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..imports import DomainError
from .kernels import beta_moments


class GridRange(BaseModel):
    """An inclusive ``start:stop:step`` axis."""

    model_config = ConfigDict(frozen=True)

    start: float
    stop: float
    step: float = Field(gt=0)

    @model_validator(mode="after")
    def _finite(self):
        if not all(math.isfinite(v) for v in (self.start, self.stop, self.step)):
            raise ValueError("grid range must be finite")
        return self

    @classmethod
    def parse(cls, spec: str) -> "GridRange":
        parts = spec.split(":")
        if len(parts) != 3:
            raise DomainError(f"bad grid range {spec!r}; expected start:stop:step")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise DomainError(f"bad grid range {spec!r}; values must be numbers") from None
        if step <= 0:
            raise DomainError(f"bad grid range {spec!r}; step must be > 0")
        return cls(start=start, stop=stop, step=step)

    def values(self) -> np.ndarray:
        if self.stop < self.start:
            return np.empty(0)
        # small slack so 0.1-style steps land on an inclusive stop
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return self.start + self.step * np.arange(count)


class SurfaceRow(NamedTuple):
    z1: float
    z2: float
    mean: float
    log_variance: float


@dataclass(frozen=True, eq=False)
class MomentSurface:
    z1: np.ndarray
    z2: np.ndarray
    mean: np.ndarray
    log_variance: np.ndarray

    def __len__(self) -> int:
        return int(self.z1.shape[0])

    def rows(self) -> Iterator[SurfaceRow]:
        for values in zip(self.z1, self.z2, self.mean, self.log_variance):
            yield SurfaceRow(*(float(v) for v in values))


def moment_surface(z1: GridRange, z2: GridRange) -> MomentSurface:
    """One row per grid point, ``z1`` outer and ``z2`` inner."""
    v1, v2 = z1.values(), z2.values()
    if v1.size == 0 or v2.size == 0:
        raise DomainError("moment surface grid is empty")
    g1, g2 = np.meshgrid(v1, v2, indexing="ij")
    g1, g2 = g1.ravel(), g2.ravel()
    moments = [beta_moments((a, b)) for a, b in zip(g1, g2)]
    return MomentSurface(
        z1=g1,
        z2=g2,
        mean=np.array([m.mean for m in moments]),
        log_variance=np.array([m.log_variance for m in moments]),
    )
