"""
Custom error types for the interface FNO package.
"""

from __future__ import annotations

from typing import Optional


class InterfaceFnoError(Exception):
    """
    Base error for all package failures.
    """


class ValidationError(InterfaceFnoError):
    """
    Raised when inputs, shapes or configuration fail validation checks.
    """


class DataFormatError(InterfaceFnoError):
    """
    Raised when a file on disk cannot be decoded.
    """


class NumericalError(InterfaceFnoError):
    """
    Raised when a computation cannot produce a meaningful finite result.
    """


class ConfigError(ValidationError):
    """
    Raised when a configuration object violates its invariants.
    """


class InvalidFieldError(ValidationError):
    """
    Raised when a field contains non-finite values.
    """


class ShapeError(ValidationError):
    """
    Raised when array dimensions disagree.
    """


class ModeRangeError(ValidationError):
    """
    Raised when Fourier mode counts exceed the spectrum or grid extents.
    """


class InvalidFractionError(ValidationError):
    """
    Raised when a volume fraction lies outside [0, 1].
    """


class GeometryError(ValidationError):
    """
    Raised when an initial shape does not fit inside the domain.
    """


class GenerationError(ValidationError):
    """
    Raised when random initial conditions cannot be placed.
    """


class StabilityError(ValidationError):
    """
    Raised when an advection step would violate the CFL limit.
    """


class InsufficientDataError(ValidationError):
    """
    Raised when too few frames are available to build a dataset.
    """


class MalformedSimulationError(ValidationError):
    """
    Raised when a simulation does not carry the expected snapshot frames.
    """


class SplitError(ValidationError):
    """
    Raised when a dataset split would leave a partition empty.
    """


class FormatError(DataFormatError):
    """
    Raised when a binary dataset file is malformed.

    Args:
        message: Human readable description.
        offset: Byte offset at which decoding failed.
    """

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class ParseError(DataFormatError):
    """
    Raised when a text grid cannot be parsed.

    Args:
        message: Human readable description.
        line: 1-based line number of the offending token.
    """

    def __init__(self, message: str, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class CheckpointError(DataFormatError):
    """
    Raised when a model checkpoint is malformed or inconsistent.
    """


class DegenerateTargetError(NumericalError):
    """
    Raised when a training target has zero norm.
    """


class DegenerateVarianceError(NumericalError):
    """
    Raised when R² is requested for a truth field with zero variance.
    """


class DegenerateNormError(NumericalError):
    """
    Raised when a relative error is requested for a zero-norm truth field.
    """


class OptimizerError(NumericalError):
    """
    Raised when the optimizer receives a non-finite gradient.

    Args:
        message: Human readable description.
        tensor: Name of the offending parameter tensor.
    """

    def __init__(self, message: str, tensor: Optional[str] = None) -> None:
        super().__init__(message)
        self.tensor = tensor


class DivergenceError(NumericalError):
    """
    Raised when the training loss becomes non-finite.

    Args:
        epoch: 1-based epoch in which the loss diverged.
        batch: 1-based batch index within the epoch.
    """

    def __init__(self, epoch: int, batch: int) -> None:
        super().__init__(f"Training diverged: non-finite loss at epoch {epoch}, batch {batch}.")
        self.epoch = epoch
        self.batch = batch
