"""Everything ``analyze`` computes for one fit, gathered in one place."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal, Optional

from ..imports import DEFAULT_COVERAGE, J_GROUP_KEY, DomainError
from ..em_driver import FitResult
from ..model_core import AnnotationDataset
from .correlation import correlation_matrix, correlation_report
from .pca import group_ellipses, pca_biplot
from .schemas import AgreementStats, CorrelationReport, DatasetOverview, EllipseSpec, PcaResult
from .votes import agreement_stats, dataset_overview, majority_vote

logger = logging.getLogger("abstract_labelembed.analysis")

GroupBy = Literal["majority", "gold", "J_group", "none"]
NO_GOLD = "none"
NO_J_GROUP = "unassigned"


def instance_groups(dataset: AnnotationDataset, by: GroupBy) -> Optional[list[str]]:
    """Biplot group label per instance, or ``None`` for an ungrouped plot."""
    names = dataset.labels.names
    if by == "none":
        return None
    if by == "majority":
        return [names[majority_vote(inst.votes).index] for inst in dataset.instances]
    if by == "gold":
        if all(inst.gold is None for inst in dataset.instances):
            raise DomainError("grouping by gold needs a dataset with gold labels")
        return [names[inst.gold] if inst.gold is not None else NO_GOLD
                for inst in dataset.instances]
    if by == "J_group":
        return [inst.metadata.get(J_GROUP_KEY, NO_J_GROUP) for inst in dataset.instances]
    raise DomainError(f"unknown grouping {by!r}")


@dataclass(frozen=True, eq=False)
class AnalysisReport:
    correlation: CorrelationReport
    pca: PcaResult
    ellipses: tuple[EllipseSpec, ...]
    agreement: AgreementStats
    overview: DatasetOverview


def build_report(fit: FitResult, dataset: AnnotationDataset, group_by: GroupBy = "majority",
                 coverage: float = DEFAULT_COVERAGE, pca_scale: bool = False) -> AnalysisReport:
    if tuple(dataset.ids) != fit.instance_ids:
        raise DomainError("dataset instances do not match the fit's instances")
    embeddings = fit.embedding_matrix()
    if fit.final_draws:
        correlation = correlation_report(embeddings, fit.final_draws, fit.labels.names)
    else:
        logger.warning("fit has no draws; correlation spread is not available")
        corr = correlation_matrix(embeddings, fit.labels.names)
        correlation = CorrelationReport(corr=corr, std=corr * 0.0,
                                        n_instances=fit.n, n_draw_slices=0)
    pca = pca_biplot(embeddings, instance_groups(dataset, group_by), scale=pca_scale)
    return AnalysisReport(
        correlation=correlation,
        pca=pca,
        ellipses=tuple(group_ellipses(pca, coverage)),
        agreement=agreement_stats(dataset),
        overview=dataset_overview(dataset),
    )
