"""Exception types shared across modules."""


class CylStableError(Exception):
    """Base class for package errors."""


class DomainError(CylStableError, ValueError):
    """A parameter lies outside the domain where the operation is defined."""


class ResolutionError(CylStableError):
    """The grid cannot resolve the requested object.

    ``suggested_n`` carries a resolution that would work, when known.
    """

    def __init__(self, message, suggested_n=None):
        super().__init__(message)
        self.suggested_n = suggested_n


class AssumptionError(CylStableError):
    """Coefficient evaluation failed or violated a standing assumption."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class QuadratureError(CylStableError):
    """A quadrature did not converge under refinement."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class GateError(CylStableError):
    """An experiment configuration violates a hypothesis of the regularity theorem."""


class ConfigError(CylStableError):
    """Malformed experiment configuration."""
