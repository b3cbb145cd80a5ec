"""Exception types shared across the package.

Each maps to a CLI exit code (see :mod:`trellis_prune.cli`).
"""


class ConfigurationError(ValueError):
    """Invalid parameter or configuration value."""

    exit_code = 2


class ResourceError(RuntimeError):
    """A model would exceed a configured size guard."""

    exit_code = 2


class InfeasibleError(ValueError):
    """Requested pruning cannot be met while every state keeps a survivor."""

    exit_code = 3

    def __init__(self, message, max_achievable=None):
        super().__init__(message)
        self.max_achievable = max_achievable


class NumericError(ArithmeticError):
    """Degenerate numerics: zero power, non-convergence, 0/0 ratios."""

    exit_code = 4
