from .schemas import (
    AgreementStats, ClassProfile, CorrelationReport, DatasetOverview, EllipseSpec,
    EmbeddingProfile, MajorityVote, PcaResult,
)
from .correlation import correlation_matrix, correlation_report, correlation_std
from .pca import concentration_ellipse, group_ellipses, pca_biplot
from .votes import agreement_stats, dataset_overview, majority_vote
from .subsample import Cohort, subsample_annotations
from .profile import embedding_profile
from .report import AnalysisReport, GroupBy, build_report, instance_groups

__all__ = [
    "AgreementStats", "ClassProfile", "CorrelationReport", "DatasetOverview",
    "EllipseSpec", "EmbeddingProfile", "MajorityVote", "PcaResult",
    "correlation_matrix", "correlation_report", "correlation_std",
    "concentration_ellipse", "group_ellipses", "pca_biplot",
    "agreement_stats", "dataset_overview", "majority_vote",
    "Cohort", "subsample_annotations",
    "embedding_profile",
    "AnalysisReport", "GroupBy", "build_report", "instance_groups",
]
