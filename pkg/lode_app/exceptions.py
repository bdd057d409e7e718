"""Error hierarchy of the pipeline.

Every error carries the exit code the management commands report for it.
"""
from __future__ import annotations

from typing import Sequence


class LodeError(Exception):
    """Base class for all pipeline errors."""

    exit_code: int = 1


class CalibrationError(LodeError):
    pass


class BehindCameraError(LodeError):
    def __init__(self, message: str = "behind camera") -> None:
        super().__init__(message)


class DegenerateBaselineError(LodeError):
    def __init__(self, message: str = "degenerate baseline") -> None:
        super().__init__(message)


class MaskFormatError(LodeError):
    pass


class InputFormatError(LodeError):
    """A shape, noise or fit-parameter file failed validation."""


class ManifestError(LodeError):
    pass


class NoObjectError(LodeError):
    """A mask has no object pixel: the localisation failed."""

    exit_code = 2

    def __init__(self, message: str = "no object") -> None:
        super().__init__(message)


class NoConvergedCircumferenceError(LodeError):
    """The object was localised but no circumference fits both masks."""

    exit_code = 3

    def __init__(self, centroid: Sequence[float] | None = None, iterations: int = 0) -> None:
        super().__init__("no converged circumference")
        self.centroid = tuple(float(c) for c in centroid) if centroid is not None else None
        self.iterations = iterations
