"""Thin a dataset's annotations down to fixed per-cohort vote counts.

Instances are dealt into cohorts by a seeded random permutation; each
instance then keeps ``J_target`` of its ballots, drawn without replacement
(a multivariate hypergeometric draw on its counts). The cohort's target is
recorded under the ``J_group`` metadata key.
"""
from __future__ import annotations

import logging
from typing import Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..imports import J_GROUP_KEY, DomainError
from ..model_core import AnnotationDataset, Instance, VoteCounts

logger = logging.getLogger("abstract_labelembed.analysis")


class Cohort(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_instances: int = Field(ge=1)
    j_target: int = Field(ge=1)

    @classmethod
    def parse(cls, spec: str) -> "Cohort":
        """``"514@100"`` is 514 instances thinned to 100 votes each."""
        try:
            n, j = spec.split("@")
            return cls(n_instances=int(n), j_target=int(j))
        except ValueError:
            raise DomainError(f"bad cohort {spec!r}; expected N@J, e.g. 500@25") from None


PlanLike = Sequence[Union[Cohort, tuple[int, int]]]


def _as_plan(plan: PlanLike) -> list[Cohort]:
    cohorts = []
    for entry in plan:
        if isinstance(entry, Cohort):
            cohorts.append(entry)
        else:
            n, j = entry
            cohorts.append(Cohort(n_instances=n, j_target=j))
    if not cohorts:
        raise DomainError("subsampling plan is empty")
    return cohorts


def subsample_annotations(dataset: AnnotationDataset, plan: PlanLike,
                          seed: int) -> AnnotationDataset:
    """Return a copy of ``dataset`` with every instance's votes thinned.

    Instance order is preserved. Raises :class:`DomainError` if the plan
    does not cover the dataset exactly or asks an instance for more votes
    than it has.
    """
    cohorts = _as_plan(plan)
    planned = sum(c.n_instances for c in cohorts)
    if planned != dataset.n:
        raise DomainError(f"plan covers {planned} instances, dataset has {dataset.n}")

    rng = np.random.default_rng(seed)
    target = np.empty(dataset.n, dtype=np.int64)
    edges = np.cumsum([c.n_instances for c in cohorts])[:-1]
    for cohort, chosen in zip(cohorts, np.split(rng.permutation(dataset.n), edges)):
        target[chosen] = cohort.j_target

    for inst, j in zip(dataset.instances, target):
        if j > inst.votes.J:
            raise DomainError(
                f"instance {inst.instance_id!r} has J={inst.votes.J} votes, "
                f"cannot keep {int(j)}")

    thinned = []
    for inst, j in zip(dataset.instances, target):
        counts = rng.multivariate_hypergeometric(inst.votes.as_array(), int(j))
        metadata = dict(inst.metadata)
        metadata[J_GROUP_KEY] = str(int(j))
        thinned.append(Instance(
            instance_id=inst.instance_id,
            votes=VoteCounts.of(counts),
            gold=inst.gold,
            metadata=metadata,
        ))
    logger.info("subsampled %d instances into cohorts %s",
                dataset.n, ", ".join(f"{c.n_instances}@{c.j_target}" for c in cohorts))
    return AnnotationDataset(labels=dataset.labels, instances=tuple(thinned))
