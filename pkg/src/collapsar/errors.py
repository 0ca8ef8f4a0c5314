"""Exception types shared across the package."""


class CollapsarError(Exception):
    """Base class for package errors."""


class DomainError(CollapsarError):
    """Input lies outside the mathematical domain of an operation."""


class ResolutionError(CollapsarError):
    """Grid or mode budget too small for the requested computation."""


class ConvergenceError(CollapsarError):
    """An iterative limit failed its convergence certificate."""


class ModeBasisError(CollapsarError):
    """A vector does not fit in the representation's mode basis."""

    def __init__(self, message, lost_norm=None):
        super().__init__(message)
        self.lost_norm = lost_norm


class ConfigError(CollapsarError):
    """Invalid run configuration."""
