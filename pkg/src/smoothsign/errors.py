"""Exception hierarchy.

Every exception carries a short machine-readable ``code`` that the command
line front end reports on failure.
"""


class SsaError(Exception):
    """Base class for all errors raised by this package."""

    code = "ssa-error"


class InvalidDimensionError(SsaError, ValueError):
    code = "invalid-dimension"


class IdentifiabilityError(SsaError, ValueError):
    """The target has no non-vanishing spectral weight."""

    code = "identifiability"


class SingularityError(SsaError, ArithmeticError):
    """nu hits a pole 2*lambda_i of the SSA-AR(2) transfer."""

    code = "singular-nu"


class InfeasibleConstraintError(SsaError, ValueError):
    """The holding-time constraint cannot be met."""

    code = "constraint-infeasible"


class NumericalError(SsaError, ArithmeticError):
    code = "numerical"


class DomainError(SsaError, ValueError):
    code = "domain"


class SpanError(SsaError, ValueError):
    """A truncated target does not cover the requested lags."""

    code = "span-too-small"


class ModelError(SsaError, ValueError):
    """Non-stationary or non-invertible process model."""

    code = "model"


class DataError(SsaError, ValueError):
    """Malformed or insufficient input data."""

    code = "data"
