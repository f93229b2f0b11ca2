"""Typed data structures for label embeddings.

These model the three layers the rest of the package builds on:

* :class:`ClassLabels` / :class:`VoteCounts` / :class:`Instance` /
  :class:`AnnotationDataset`: what annotators said, tallied per instance.
* :class:`Embedding` / :class:`GaussianPrior`: the latent K-vector ``z`` of an
  instance and the empirical-Bayes normal prior it is drawn from.
* :class:`DirichletMoments`: what ``z`` implies for the class probabilities.

Vote records are frozen pydantic models (hashable, validated on
construction). Types that carry float arrays are frozen dataclasses that
validate in ``__post_init__``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.special import softmax

from ..imports import (
    JITTER_REL, JITTER_RETRIES, SYMMETRY_TOL, DomainError, NumericalError,
)

logger = logging.getLogger("abstract_labelembed.model_core")


# ---------------------------------------------------------------------------
# Votes
# ---------------------------------------------------------------------------
class ClassLabels(BaseModel):
    """The ordered class names; position ``k`` is class ``k`` everywhere."""

    model_config = ConfigDict(frozen=True)

    names: tuple[str, ...] = Field(min_length=2)

    @field_validator("names")
    @classmethod
    def _unique(cls, names: tuple[str, ...]) -> tuple[str, ...]:
        if any(not n for n in names):
            raise ValueError("class names must be non-empty")
        if len(set(names)) != len(names):
            raise ValueError(f"class names must be unique: {list(names)!r}")
        return names

    @property
    def K(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DomainError(f"unknown class {name!r}; known: {list(self.names)!r}") from None


class VoteCounts(BaseModel):
    """Per-instance tally of annotations over the K classes."""

    model_config = ConfigDict(frozen=True)

    counts: tuple[int, ...] = Field(min_length=1)

    @field_validator("counts")
    @classmethod
    def _non_negative(cls, counts: tuple[int, ...]) -> tuple[int, ...]:
        if any(c < 0 for c in counts):
            raise ValueError(f"vote counts must be non-negative: {list(counts)!r}")
        if sum(counts) < 1:
            raise ValueError("an instance needs at least one vote")
        return counts

    @classmethod
    def of(cls, counts: Iterable[int]) -> "VoteCounts":
        return cls(counts=tuple(int(c) for c in counts))

    @property
    def J(self) -> int:
        return sum(self.counts)

    @property
    def K(self) -> int:
        return len(self.counts)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.int64)


class Instance(BaseModel):
    """One annotated item: its id, votes, optional gold label and metadata."""

    model_config = ConfigDict(frozen=True)

    instance_id: str = Field(min_length=1)
    votes: VoteCounts
    gold: Optional[int] = Field(default=None, ge=0)
    metadata: dict[str, str] = Field(default_factory=dict)


class AnnotationDataset(BaseModel):
    """Class labels plus the ordered instances annotated against them."""

    model_config = ConfigDict(frozen=True)

    labels: ClassLabels
    instances: tuple[Instance, ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _consistent(self):
        K = self.labels.K
        seen: set[str] = set()
        for inst in self.instances:
            if inst.instance_id in seen:
                raise ValueError(f"duplicate instance id {inst.instance_id!r}")
            seen.add(inst.instance_id)
            if inst.votes.K != K:
                raise ValueError(
                    f"instance {inst.instance_id!r} has {inst.votes.K} counts, "
                    f"expected {K}")
            if inst.gold is not None and inst.gold >= K:
                raise ValueError(
                    f"instance {inst.instance_id!r} gold index {inst.gold} out of range")
        return self

    @property
    def K(self) -> int:
        return self.labels.K

    @property
    def n(self) -> int:
        return len(self.instances)

    @property
    def ids(self) -> list[str]:
        return [inst.instance_id for inst in self.instances]

    def count_matrix(self) -> np.ndarray:
        """``(n, K)`` integer matrix of vote counts."""
        return np.asarray([inst.votes.counts for inst in self.instances], dtype=np.int64)

    def patterns(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct count vectors in first-appearance order, and each
        instance's pattern index."""
        index: dict[tuple[int, ...], int] = {}
        inverse = np.empty(self.n, dtype=np.int64)
        for i, inst in enumerate(self.instances):
            inverse[i] = index.setdefault(inst.votes.counts, len(index))
        unique = np.asarray(list(index), dtype=np.int64).reshape(len(index), self.K)
        return unique, inverse

    def drop_classes(self, names: Sequence[str]) -> "AnnotationDataset":
        """Remove classes; instances left with no votes are dropped."""
        if not names:
            return self
        drop = {self.labels.index(n) for n in names}
        keep = [k for k in range(self.K) if k not in drop]
        if len(keep) < 2:
            raise DomainError("dropping these classes leaves fewer than 2")
        remap = {old: new for new, old in enumerate(keep)}
        kept: list[Instance] = []
        removed = 0
        for inst in self.instances:
            counts = tuple(inst.votes.counts[k] for k in keep)
            if sum(counts) == 0:
                removed += 1
                continue
            kept.append(Instance(
                instance_id=inst.instance_id,
                votes=VoteCounts(counts=counts),
                gold=remap.get(inst.gold) if inst.gold is not None else None,
                metadata=dict(inst.metadata),
            ))
        if removed:
            logger.warning("dropped %d instance(s) with no votes left after "
                           "removing classes %s", removed, list(names))
        if not kept:
            raise DomainError("no instances left after dropping classes")
        return AnnotationDataset(
            labels=ClassLabels(names=tuple(self.labels.names[k] for k in keep)),
            instances=tuple(kept),
        )

    def permute_classes(self, order: Sequence[int]) -> "AnnotationDataset":
        """Reorder the class columns; ``order[new] = old``."""
        order = list(order)
        if sorted(order) != list(range(self.K)):
            raise DomainError(f"not a permutation of 0..{self.K - 1}: {order!r}")
        back = {old: new for new, old in enumerate(order)}
        return AnnotationDataset(
            labels=ClassLabels(names=tuple(self.labels.names[k] for k in order)),
            instances=tuple(
                Instance(
                    instance_id=inst.instance_id,
                    votes=VoteCounts(counts=tuple(inst.votes.counts[k] for k in order)),
                    gold=back[inst.gold] if inst.gold is not None else None,
                    metadata=dict(inst.metadata),
                )
                for inst in self.instances
            ),
        )


# ---------------------------------------------------------------------------
# Latent embedding and its prior
# ---------------------------------------------------------------------------
def _as_vector(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise DomainError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries: {arr!r}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Embedding:
    """An instance's latent K-vector ``z``; ``alpha_k = exp(z_k)``."""

    z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z", _as_vector(self.z, "embedding"))

    @property
    def K(self) -> int:
        return int(self.z.shape[0])

    def softmax(self) -> np.ndarray:
        return softmax(self.z)


def _cholesky_with_jitter(sigma: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Lower Cholesky factor of ``sigma``, adding diagonal jitter on failure.

    Jitter starts at ``JITTER_REL * mean(diag)`` (or ``JITTER_REL`` when the
    diagonal is zero) and grows tenfold per retry. Returns
    ``(chol, sigma_used, jitter)``.
    """
    try:
        return np.linalg.cholesky(sigma), sigma, 0.0
    except np.linalg.LinAlgError:
        pass
    scale = float(np.mean(np.diag(sigma)))
    base = JITTER_REL * (scale if scale > 0 else 1.0)
    eye = np.eye(sigma.shape[0])
    for attempt_no in range(JITTER_RETRIES):
        jitter = base * (10.0 ** attempt_no)
        candidate = sigma + jitter * eye
        try:
            chol = np.linalg.cholesky(candidate)
        except np.linalg.LinAlgError:
            continue
        logger.debug("prior covariance needed jitter %.3g", jitter)
        return chol, candidate, jitter
    raise NumericalError(
        f"prior covariance is not positive-definite after {JITTER_RETRIES} "
        f"jitter retries (smallest eigenvalue "
        f"{float(np.linalg.eigvalsh(sigma).min()):.3g})")


@dataclass(frozen=True, eq=False)
class GaussianPrior:
    """Multivariate normal prior ``N(mu, sigma)`` over embeddings.

    The Cholesky factor is computed once here; if ``sigma`` is not
    positive-definite the jitter policy in :func:`_cholesky_with_jitter`
    applies and ``sigma`` is stored with the jitter added.
    """

    mu: np.ndarray
    sigma: np.ndarray
    chol: np.ndarray = field(init=False, repr=False, compare=False)
    jitter: float = field(init=False, default=0.0, compare=False)

    def __post_init__(self):
        mu = _as_vector(self.mu, "prior mean")
        sigma = np.array(self.sigma, dtype=np.float64)
        K = mu.shape[0]
        if sigma.shape != (K, K):
            raise DomainError(f"prior covariance shape {sigma.shape} != ({K}, {K})")
        if not np.all(np.isfinite(sigma)):
            raise DomainError("prior covariance has non-finite entries")
        if np.max(np.abs(sigma - sigma.T)) > SYMMETRY_TOL:
            raise DomainError("prior covariance is not symmetric")
        sigma = 0.5 * (sigma + sigma.T)
        chol, sigma, jitter = _cholesky_with_jitter(sigma)
        sigma.setflags(write=False)
        chol.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "chol", chol)
        object.__setattr__(self, "jitter", jitter)

    @property
    def K(self) -> int:
        return int(self.mu.shape[0])

    @property
    def log_det(self) -> float:
        return float(2.0 * np.sum(np.log(np.diag(self.chol))))

    def log_density_rows(self, Z: np.ndarray) -> np.ndarray:
        """Log-density of each row of ``Z`` (shape ``(P, K)``).

        Forward substitution is written column by column so each row's value
        depends only on that row, whatever else is in the batch.
        """
        diff = np.asarray(Z, dtype=np.float64) - self.mu
        L = self.chol
        K = self.K
        w = np.empty_like(diff)
        quad = np.zeros(diff.shape[0])
        for k in range(K):
            acc = diff[:, k].copy()
            for j in range(k):
                acc -= L[k, j] * w[:, j]
            w[:, k] = acc / L[k, k]
            quad += w[:, k] * w[:, k]
        return -0.5 * quad - 0.5 * self.log_det - 0.5 * K * np.log(2.0 * np.pi)

    def log_density(self, z) -> float:
        z = _as_vector(z.z if isinstance(z, Embedding) else z, "embedding")
        if z.shape[0] != self.K:
            raise DomainError(f"embedding has {z.shape[0]} entries, prior has {self.K}")
        return float(self.log_density_rows(z[None, :])[0])

    def to_dict(self) -> dict:
        return {"mu": self.mu.tolist(), "sigma": self.sigma.tolist()}


@dataclass(frozen=True, eq=False)
class DirichletMoments:
    """Mean vector and covariance matrix of ``pi ~ Dir(exp z)``."""

    mean: np.ndarray
    cov: np.ndarray
