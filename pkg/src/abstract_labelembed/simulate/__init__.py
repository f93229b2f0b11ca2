from .schemas import RecoveryScore, SimSpec
from .generate import log_dirichlet_draw, sample_dataset
from .recovery import recovery_score

__all__ = ["RecoveryScore", "SimSpec", "log_dirichlet_draw", "sample_dataset", "recovery_score"]
