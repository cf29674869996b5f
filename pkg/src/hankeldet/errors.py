"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


class BoundaryError(ValueError):
    """A matrix or moment point lies on (or numerically at) the boundary."""


class OutOfStripError(DomainError):
    """CGF evaluated where a shifted beta shape would be nonpositive."""

    def __init__(self, message, z_min=None, z_max=None):
        super().__init__(message)
        self.z_min = z_min
        self.z_max = z_max


class ConfigError(ValueError):
    """Invalid experiment configuration."""
