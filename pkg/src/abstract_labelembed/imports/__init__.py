from .constants import *
from .except_utils import (
    DatasetParseError, DomainError, InitializationError, LabelEmbedError,
    NumericalError, UsageError, EXIT_DATA, EXIT_NUMERICAL, EXIT_OK,
    EXIT_USAGE, attempt, exit_code_for,
)
