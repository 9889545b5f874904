"""
Exception hierarchy for HydroDeep.

Every error carries a ``message`` and the process exit code the command line
maps it to: 1 for usage/config problems, 2 for data problems and 3 for
numeric-verification failures.
"""


class HydroDeepError(Exception):
    """Base exception for application errors."""

    exit_code = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ConfigError(HydroDeepError):
    """Invalid or unknown configuration."""


class ParameterError(HydroDeepError, ValueError):
    """An argument is outside its allowed range."""


class DimensionError(HydroDeepError, ValueError):
    """Tensor shapes do not agree."""


class WindowError(DimensionError):
    """A sliding window is longer than the sequence it slides over."""


class EmptySequenceError(DimensionError):
    """A recurrent layer received a zero-length sequence."""


class NonFiniteError(HydroDeepError, ValueError):
    """NaN or Inf reached a public operation."""


class StateError(HydroDeepError, RuntimeError):
    """An operation was called out of order (e.g. backward before forward)."""


class BuildError(ConfigError):
    """A model configuration cannot be assembled."""


class DataError(HydroDeepError):
    """Input data is malformed or insufficient."""

    exit_code = 2


class DataParseError(DataError, ValueError):
    """A CSV file could not be parsed."""


class InsufficientHistoryError(DataError, ValueError):
    """A series is too short for the requested lag."""


class DegenerateMetricError(DataError, ValueError):
    """A metric is undefined for the given observations."""


class CheckpointError(DataError):
    """A checkpoint file is corrupt or of an unsupported version."""


class NumericVerificationError(HydroDeepError):
    """A numerical self-check failed."""

    exit_code = 3


class FreezeViolationError(NumericVerificationError):
    """A frozen parameter changed during finetuning."""
