import logging

from abstract_utilities import get_env_value

logger = logging.getLogger("abstract_labelembed.imports")


def _env_int(name: str, default: int) -> int:
    raw = get_env_value(name)
    if raw is None or str(raw).strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning("ignoring non-integer %s=%r", name, raw)
        return default


def _env_float(name: str, default: float) -> float:
    raw = get_env_value(name)
    if raw is None or str(raw).strip() == "":
        return default
    try:
        return float(raw)
    except ValueError:
        logger.warning("ignoring non-numeric %s=%r", name, raw)
        return default


# ---------------------------------------------------------------------
# Execution knobs (never recorded in a RunConfig)
# ---------------------------------------------------------------------
DEFAULT_WORKERS = max(1, _env_int("LABELEMBED_WORKERS", 1))

DEFAULT_LOG_LEVEL = (get_env_value("LABELEMBED_LOG_LEVEL") or "INFO").upper()

# ---------------------------------------------------------------------
# Sampler defaults: mcmc=1000, burnin=50, thin=20
# ---------------------------------------------------------------------
DEFAULT_MCMC = _env_int("LABELEMBED_MCMC", 1000)
DEFAULT_BURNIN = _env_int("LABELEMBED_BURNIN", 50)
DEFAULT_THIN = _env_int("LABELEMBED_THIN", 20)
DEFAULT_PROPOSAL_SCALE = _env_float("LABELEMBED_PROPOSAL_SCALE", 0.5)

# The profile the CLI help recommends when 50 burn-in steps are too few.
ROBUST_BURNIN = 500
ROBUST_THIN = 5

TARGET_ACCEPTANCE = 0.234
ACCEPTANCE_WARN_BAND = (0.05, 0.95)

# Noise is drawn per chain in fixed-size blocks; block edges depend only on
# the step index so a chain's stream never depends on its batch.
NOISE_BLOCK = 1024

# ---------------------------------------------------------------------
# EM defaults
# ---------------------------------------------------------------------
DEFAULT_EM_ITERS = _env_int("LABELEMBED_EM_ITERS", 50)
DEFAULT_REL_TOL = _env_float("LABELEMBED_REL_TOL", 1e-3)
DEFAULT_MIN_ITERS = _env_int("LABELEMBED_MIN_ITERS", 5)
CONVERGENCE_WINDOW = 2

PRIOR_INIT_VARIANCE = 10.0

# ---------------------------------------------------------------------
# Numerics
# ---------------------------------------------------------------------
Z_CLAMP = 30.0
JITTER_REL = 1e-8
JITTER_RETRIES = 3
SYMMETRY_TOL = 1e-10

DEFAULT_COVERAGE = 0.95

# ---------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------
FORMAT_VERSION = "1"
FLOAT_FMT = ".17g"
META_PREFIX = "meta:"
GOLD_COLUMN = "gold"
J_GROUP_KEY = "J_group"
