"""Vote tallies: majority labels, agreement and dataset size."""
from __future__ import annotations

from typing import Iterable, Union

import numpy as np

from ..model_core import AnnotationDataset, VoteCounts
from .schemas import AgreementStats, DatasetOverview, MajorityVote


def majority_vote(votes: Union[VoteCounts, Iterable[int]]) -> MajorityVote:
    """Most-voted class; ties go to the lowest index and set ``tie``."""
    counts = votes.counts if isinstance(votes, VoteCounts) else VoteCounts.of(votes).counts
    top = max(counts)
    index = counts.index(top)
    return MajorityVote(index=index, tie=counts.count(top) > 1)


def agreement_stats(dataset: AnnotationDataset) -> AgreementStats:
    Y = dataset.count_matrix()
    unanimous = int(np.count_nonzero(np.count_nonzero(Y, axis=1) == 1))
    majority = np.zeros(dataset.K, dtype=np.int64)
    ties = 0
    for inst in dataset.instances:
        vote = majority_vote(inst.votes)
        majority[vote.index] += 1
        ties += vote.tie
    patterns, _ = dataset.patterns()
    return AgreementStats(
        full_agreement_fraction=unanimous / dataset.n,
        distinct_pattern_count=int(patterns.shape[0]),
        majority_counts=tuple(int(c) for c in majority),
        tie_count=ties,
    )


def dataset_overview(dataset: AnnotationDataset) -> DatasetOverview:
    Y = dataset.count_matrix()
    J = Y.sum(axis=1)
    patterns, _ = dataset.patterns()
    return DatasetOverview(
        n_instances=dataset.n,
        n_classes=dataset.K,
        distinct_patterns=int(patterns.shape[0]),
        j_min=int(J.min()),
        j_max=int(J.max()),
        total_votes=int(J.sum()),
    )
