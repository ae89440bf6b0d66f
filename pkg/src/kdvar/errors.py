"""Exception hierarchy shared across the package.

All domain-level failures derive from ``KdvarError`` so the CLI can map
them uniformly to exit code 1.
"""


class KdvarError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(KdvarError, ValueError):
    """Malformed or non-finite input (precondition violations)."""


class DomainError(KdvarError, ValueError):
    """Input is finite and well-formed but outside the mathematical domain."""


class InfeasibleRatioError(DomainError):
    """Constraint ratio B/A exceeds 1; the power-sum system is unsolvable."""


class UnsupportedSizeError(KdvarError):
    """Requested problem size exceeds the supported range."""


class CoverageError(KdvarError):
    """Grid does not cover the requested profiles with sufficient margin."""


class GridMismatchError(KdvarError):
    """Two grid functions live on different grids."""


class ProjectionFailureError(KdvarError):
    """Newton projection onto the constraint manifold did not converge."""
