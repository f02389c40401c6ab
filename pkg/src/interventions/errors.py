"""Exception hierarchy shared by all engines."""


class InterventionError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(InterventionError, ValueError):
    """A value violates a type invariant or an operation precondition."""


class IdealLimitError(InterventionError):
    """An operation needs a finite-noise apparatus but got the ideal (sigma = 0) limit."""


class DegenerateMeasurementError(InvalidParameterError):
    """Sharpness C = 1: the measurement carries no information and the work diverges."""


class LeakageError(InterventionError):
    """Probability mass reached the edge of a grid or the top of a Fock truncation."""


class ResolutionError(InterventionError):
    """A grid is too coarse to resolve the requested feature."""


class GridTooLargeError(InterventionError, MemoryError):
    """A 2D joint grid would exceed the configured size cap."""


class OutcomeIncompatibleError(InterventionError):
    """The observed outcome has (numerically) zero probability under the prior."""


class StatisticalPowerError(InvalidParameterError):
    """Too few Monte Carlo trials for the requested statistical checks."""


class ConfigurationMismatchError(InterventionError):
    """Two objects that must describe the same configuration do not."""


class ConfigError(InterventionError):
    """Malformed experiment configuration (file or command-line overrides)."""


class PreconditionError(InvalidParameterError):
    """An operation's documented precondition does not hold."""
