"""Exception hierarchy.

Two families matter to callers: configuration problems (bad parameters,
malformed files) and numerical failures (a computation that cannot be
carried out faithfully on the requested grid). The command-line runner maps
them to distinct exit codes.
"""


class CVTeleportError(Exception):
    """Base class for all package errors."""


class ConfigError(CVTeleportError, ValueError):
    """Invalid user-facing configuration or parameter value."""


class InvalidParameterError(ConfigError):
    """A physical parameter lies outside its admissible range."""


class NumericalError(CVTeleportError, ArithmeticError):
    """A numerical procedure cannot deliver a trustworthy result."""


class NoThresholdError(NumericalError):
    """The output negativity never crosses zero for the given input state."""


class DomainTooSmallError(NumericalError):
    """The phase-space window clips too much probability mass."""


class AliasingError(NumericalError):
    """Periodic wrap-around of a spectral convolution exceeds tolerance."""


class StabilityError(NumericalError):
    """An explicit time step violates the stability bound."""


class DomainError(NumericalError):
    """A requested point lies outside the sampled domain."""


class GridMismatchError(ConfigError):
    """Two sampled objects are defined on incompatible grids."""


class GridSpanError(NumericalError):
    """A frequency grid truncates too much of a mode function."""


class PumpRangeError(InvalidParameterError):
    """OPO pump parameter at or above the oscillation threshold."""


class NegativeNoiseError(InvalidParameterError):
    """A noise spectrum contains negative samples."""


class DegeneratePurityError(NumericalError):
    """A state has (numerically) vanishing purity."""


class UnknownFigureError(ConfigError):
    """Requested figure name is not known."""


class BudgetExceededError(ConfigError):
    """A sweep requests more evaluations than allowed."""


class NegativeWeightWarning(UserWarning):
    """A spectral weight has negative lobes."""
