"""
Error Types

Typed exceptions raised by the measure, observable, dynamics and spectral
modules. The command line front end maps them onto exit codes.
"""

from typing import Any, Optional


class NekError(Exception):
    """Root of all library errors."""


class ConfigError(NekError, ValueError):
    """Invalid run configuration or parameter file."""


class ResonanceError(NekError, ValueError):
    """A denominator theta factor vanishes for the given parameters."""

    def __init__(self, message: str, vector: Any = None, value: Any = None):
        super().__init__(message)
        self.vector = vector
        self.value = value


class PoleError(NekError, ZeroDivisionError):
    """Evaluation at a pole (lattice point, z = 0, zero of a Y-observable)."""

    def __init__(self, message: str, point: Any = None):
        super().__init__(message)
        self.point = point


class SingularConfigurationError(NekError, ValueError):
    """Coincident particle positions or a collision during integration."""

    def __init__(self, message: str, separation: Optional[float] = None, time: Optional[float] = None):
        super().__init__(message)
        self.separation = separation
        self.time = time


class TruncationError(NekError):
    """A truncated enumeration came out empty."""

    def __init__(self, message: str, order: Optional[int] = None):
        super().__init__(message)
        self.order = order


class NumericalError(NekError, ArithmeticError):
    """Ill-conditioned linear algebra or a failed numerical consistency check."""

    def __init__(self, message: str, condition: Optional[float] = None):
        super().__init__(message)
        self.condition = condition
