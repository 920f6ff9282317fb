"""Exception types raised across the package."""


class DomainError(ValueError):
    """An input lies outside the range where a model is defined."""


class SelfLockingError(DomainError):
    """A self-reinforcing shoe whose friction moment exceeds its normal moment."""


class IntegrationError(RuntimeError):
    """The time integration produced a non-finite state."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class TrainingError(RuntimeError):
    """The classifier cannot be trained on the given data."""


class ConfigError(ValueError):
    """A configuration file could not be parsed or validated."""
