"""Exception types shared across the package."""


class SpecvolError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(SpecvolError, ValueError):
    """A model, grid or estimator parameter is out of its valid range."""


class DomainError(SpecvolError, ValueError):
    """A quantity was evaluated outside its mathematical domain."""


class DegenerateFitError(SpecvolError, ValueError):
    """A fitted model is degenerate (e.g. signal and noise variance both zero)."""


class FitFailedError(SpecvolError, RuntimeError):
    """Likelihood maximisation did not converge.

    Carries the best iterate found so callers can inspect or salvage it.
    """

    def __init__(self, message, fit=None):
        super().__init__(message)
        self.fit = fit


class ExperimentError(SpecvolError, RuntimeError):
    """A Monte Carlo experiment could not be completed."""


class ConfigError(SpecvolError, ValueError):
    """An experiment configuration file is malformed."""
