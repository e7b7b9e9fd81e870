"""Exception types raised across the package."""


class SteklovError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SteklovError, ValueError):
    """A radius, volume or node value lies outside the admissible range."""


class UnsupportedSpaceError(SteklovError, ValueError):
    """The operation is not defined (or not implemented) on this model space."""


class UnsupportedModeError(SteklovError, ValueError):
    """The requested spherical-harmonic degree has no known radial eigenvalue here."""


class TruncationError(SteklovError, ArithmeticError):
    """A power series could not be certified at the requested radius."""


class NumericalError(SteklovError, ArithmeticError):
    """An iterative solver or integrator failed to produce a finite answer."""


class ClaimViolation(SteklovError, AssertionError):
    """A proven structural property failed numerically; signals a bug."""
