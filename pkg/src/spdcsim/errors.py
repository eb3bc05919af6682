"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: configuration problems
exit with code 2, numerical failures with code 3.
"""


class SpdcsimError(Exception):
    """Base class for all package errors."""


class ConfigError(SpdcsimError, ValueError):
    """Invalid configuration file, field value, or command usage."""


class DomainError(SpdcsimError, ValueError):
    """Physical input outside the validity domain of a model."""


class IntegrabilityError(SpdcsimError, ArithmeticError):
    """The Gaussian quadratic form lost positive-definiteness at a node."""


class StateError(SpdcsimError, ValueError):
    """Operation called on a density matrix in the wrong normalization state."""
