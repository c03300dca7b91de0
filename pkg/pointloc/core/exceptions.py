"""Exception hierarchy for PointLoc.

Every error carries the process exit code the CLI reports for it:
1 for usage/configuration problems, 2 for data problems, 3 for numeric failures.
"""

from __future__ import annotations


class PointLocError(Exception):
    """Base class for PointLoc exceptions."""

    exit_code: int = 1


class UsageError(PointLocError):
    """Raised when a command is invoked incorrectly."""

    exit_code = 1


class ConfigError(UsageError):
    """Raised when a run configuration is invalid or contains unknown keys."""


class InvalidArgumentError(PointLocError, ValueError):
    """Raised when a function precondition on an argument is violated."""

    exit_code = 1


# --- Data errors -----------------------------------------------------------------------------


class DataError(PointLocError):
    """Base class for dataset, file format and I/O problems."""

    exit_code = 2


class CloudParseError(DataError):
    """Raised when a binary cloud file cannot be parsed."""

    def __init__(self, path: str, offset: int, reason: str):
        self.path = path
        self.offset = offset
        self.reason = reason
        super().__init__(f"{path}: {reason} (byte offset {offset})")


class ManifestError(DataError):
    """Raised when a dataset manifest is malformed or violates split disjointness."""


class EmptySplitError(DataError):
    """Raised when an operation needs frames from a split that has none."""


class DatasetIOError(DataError):
    """Raised when dataset or output files cannot be read or written."""


class CheckpointError(DataError):
    """Raised when a checkpoint is malformed or incompatible with the model scale."""


class SceneError(DataError):
    """Raised when a sensor pose or scene definition is invalid."""


# --- Numeric errors --------------------------------------------------------------------------


class NumericError(PointLocError):
    """Base class for numerical failures."""

    exit_code = 3


class DimensionError(NumericError):
    """Raised when tensor shapes do not conform."""


class NonFiniteError(NumericError):
    """Raised when a NaN or Inf would enter the computation graph."""


class EmptyGroupError(NumericError):
    """Raised when a max-pool group has no valid rows."""


class EmptyNeighborhoodError(NumericError):
    """Raised when a ball query finds no point inside the radius of a center."""

    def __init__(self, center_index: int, radius: float):
        self.center_index = center_index
        self.radius = radius
        super().__init__(f"Center {center_index} has no points within radius {radius}")


class DegenerateQuaternionError(NumericError):
    """Raised when a quaternion is too close to zero to normalize."""


class OutOfRangeError(NumericError):
    """Raised when a log-quaternion lies outside the invertible range."""


class DeterminismError(NumericError):
    """Raised when repeated evaluations of a computation disagree."""


class MissingGradientError(NumericError):
    """Raised when the optimizer finds a registered parameter without a gradient."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"No gradient for parameter '{name}'")


class TrainingDivergedError(NumericError):
    """Raised when a training batch produces a non-finite loss."""

    def __init__(self, batch_id: str, message: str | None = None):
        self.batch_id = batch_id
        super().__init__(message or f"Non-finite loss in batch {batch_id}")


class GradientCheckError(NumericError):
    """Raised when analytic gradients disagree with finite differences."""
