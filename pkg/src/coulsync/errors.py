"""Exception types shared across the package."""


class CoulsyncError(Exception):
    """Base class for all package errors."""


class DomainError(CoulsyncError):
    """An argument lies outside the mathematical domain of an operation."""


class IntegrationDivergedError(CoulsyncError):
    """A trajectory produced non-finite values.

    Carries the simulation time at which the divergence was detected.
    """

    def __init__(self, time, message=None):
        self.time = time
        super().__init__(message or f"integration diverged at tau={time:g}")


class InsufficientDataError(CoulsyncError):
    """An analysis window contains too few samples or cycles."""


class NonphysicalCovarianceError(CoulsyncError):
    """A synchronization denominator came out non-positive."""


class UnstableDriftError(CoulsyncError):
    """The drift matrix is not Hurwitz-stable where stability is required."""


class DegenerateSystemError(CoulsyncError):
    """A linear system that should be solvable is numerically singular."""


class ConfigError(CoulsyncError):
    """A scenario or sweep configuration file is invalid."""
