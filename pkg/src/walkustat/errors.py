"""Exception types shared across the package.

Each class carries the process exit code the CLI maps it to, so library
users and the CLI agree on failure semantics.
"""


class ParameterError(ValueError):
    """Invalid parameter, config entry, or malformed/mismatched input data."""

    exit_code = 2


class NumericError(ArithmeticError):
    """A computation produced NaN/Inf or left its representable range."""

    exit_code = 3


class RegimeError(RuntimeError):
    """An operation was asked to run under a walk regime it does not cover."""

    exit_code = 4
