"""Exception types raised across the package."""


class PucciLabError(Exception):
    """Base class for all package errors."""


class DiniClassificationError(PucciLabError, ValueError):
    """A modulus failed the Dini classification an operation required."""


class InconclusiveQuadratureError(PucciLabError):
    """Tabulated data does not resolve the integral to the requested tolerance."""


class PrecisionError(PucciLabError):
    """No admissible dyadic radius exists above the floating point floor."""


class ResolutionError(PucciLabError):
    """The grid is too coarse for the geometry or the requested measurement."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class AssemblyError(PucciLabError):
    """A stencil arm has no value source."""


class NonConvergenceError(PucciLabError):
    """The nonlinear solver stopped before reaching the residual tolerance."""

    def __init__(self, message, residual_history=()):
        super().__init__(message)
        self.residual_history = list(residual_history)


class ConfigError(PucciLabError):
    """An experiment configuration failed validation.

    ``pointer`` is the JSON pointer of the offending field.
    """

    def __init__(self, message, pointer=""):
        super().__init__(message)
        self.pointer = pointer
