from .schemas import EmConfig, FitResult, IterationRecord, MStep
from .prior import init_prior, pooled_prior, update_prior
from .estep import pattern_seeds, sample_patterns
from .fitting import embed_new_instance, fit

__all__ = [
    "EmConfig", "FitResult", "IterationRecord", "MStep",
    "init_prior", "pooled_prior", "update_prior",
    "pattern_seeds", "sample_patterns",
    "embed_new_instance", "fit",
]
