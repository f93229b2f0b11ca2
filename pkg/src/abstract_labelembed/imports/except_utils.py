import logging

from pydantic import ValidationError

logger = logging.getLogger("abstract_labelembed.imports")


class LabelEmbedError(Exception):
    """Base for every error this package raises on purpose."""


class DomainError(LabelEmbedError, ValueError):
    """An input violates an operation's pre-conditions."""


class DatasetParseError(DomainError):
    """A dataset file is malformed at a specific line."""

    def __init__(self, path, line: int, reason: str):
        self.path = str(path)
        self.line = int(line)
        self.reason = reason
        super().__init__(f"{self.path}:{self.line}: {reason}")


class InitializationError(LabelEmbedError, RuntimeError):
    """A sampler could not start (target non-finite at the initial state)."""


class NumericalError(LabelEmbedError, ArithmeticError):
    """A numerical procedure failed after its recovery policy ran out."""


class UsageError(LabelEmbedError):
    """The command line could not be understood."""


EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the CLI's exit status."""
    if isinstance(exc, UsageError):
        return EXIT_USAGE
    if isinstance(exc, (NumericalError, InitializationError)):
        return EXIT_NUMERICAL
    if isinstance(exc, DomainError):
        return EXIT_DATA
    # flag values are checked by the pydantic config models
    if isinstance(exc, ValidationError):
        return EXIT_USAGE
    if isinstance(exc, (ValueError, OSError)):
        return EXIT_DATA
    return EXIT_NUMERICAL


def attempt(fn, *args, label=None, **kwargs):
    """Run fn; return (ok, value, exc).

    Unlike a bare try, the caller gets the exception object back so it can
    pick an exit code or log level by type. Expected failures (our own
    error types, bad values, missing files) are logged at DEBUG; anything
    else gets a stack at ERROR.
    """
    label = label or getattr(fn, "__name__", repr(fn))
    try:
        return True, fn(*args, **kwargs), None
    except (LabelEmbedError, ValueError, OSError) as exc:
        logger.debug("attempt: %s failed", label, exc_info=True)
        return False, None, exc
    except Exception as exc:
        logger.exception("attempt: %s failed", label)
        return False, None, exc
