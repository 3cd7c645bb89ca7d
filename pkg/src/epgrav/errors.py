"""Exception hierarchy shared by the library and the CLI.

The CLI maps :class:`ValidationError` to exit code 1 and
:class:`NumericalError` to exit code 2.
"""


class ValidationError(ValueError):
    """Invalid input or configuration. ``path`` names the offending field."""

    def __init__(self, message, path=None):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if path else message)


class BalanceError(ValidationError):
    """Gain and loss cannot be balanced for the requested drive mapping."""

    def __init__(self, message, residual):
        self.residual = residual
        super().__init__(message)


class NumericalError(RuntimeError):
    """A numerical stage failed (no root, no convergence, too coarse)."""


class NoEPError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class ResolutionError(NumericalError):
    pass


class FitError(NumericalError):
    pass
