"""Exception hierarchy shared by the numerical layers and the CLI."""


class EvSwitchError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(EvSwitchError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class PoleError(DomainError):
    """Evaluation at a pole (e.g. the Gamma function at a non-positive integer)."""


class NumericFailure(EvSwitchError, ArithmeticError):
    """A numerical procedure did not converge or could not bracket a root."""


class NumericRangeError(NumericFailure, OverflowError):
    """Result would underflow/overflow double precision."""


class ConfigError(EvSwitchError, ValueError):
    """Malformed or inconsistent run configuration."""
