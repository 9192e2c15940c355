"""
Exception hierarchy for TopoHopf.

Every error carries the process exit code the command line maps it to:
2 for configuration problems, 3 for data problems, 4 for numeric failures.
"""

from typing import Any, Optional


class TopoHopfError(Exception):
    """Base class for all TopoHopf errors."""

    exit_code = 1


# Configuration errors (exit 2)

class ConfigError(TopoHopfError):
    exit_code = 2


class UnknownSystem(ConfigError):
    pass


class ParamOutOfRange(ConfigError):
    """A parameter lies outside the declared sampling range."""

    def __init__(self, message: str, coordinate: Optional[str] = None):
        super().__init__(message)
        self.coordinate = coordinate


class UnsupportedSystem(ConfigError):
    pass


class ExtentMismatch(ConfigError):
    pass


class ProfileNotFound(ConfigError):
    pass


# Data errors (exit 3)

class DataError(TopoHopfError):
    exit_code = 3


class IoError(DataError):
    pass


class BadMagic(DataError):
    pass


class VersionMismatch(DataError):
    pass


class CorruptPayload(DataError):
    pass


class ShapeManifestMismatch(DataError):
    pass


class EmptyDataset(DataError):
    pass


class DegenerateLabels(DataError):
    pass


class TooShort(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class NonFiniteField(DataError):
    """A velocity raster holds NaN or inf entries."""


# Numeric failures (exit 4)

class NumericError(TopoHopfError):
    exit_code = 4


class NonFiniteInput(NumericError):
    pass


class NonFiniteState(NumericError):
    """Integration diverged; `partial` holds the trajectory prefix."""

    def __init__(self, message: str, partial: Any = None):
        super().__init__(message)
        self.partial = partial


class NoOscillationWindow(NumericError):
    pass


class NoValidNeighbors(NumericError):
    pass
