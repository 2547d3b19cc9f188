"""Exception hierarchy shared by the numeric, model and estimation layers."""


class MesinarError(Exception):
    """Base class for package errors."""


class DomainError(MesinarError, ValueError):
    """An argument lies outside the domain of the function or distribution.

    ``name`` carries the offending parameter name when known so that the CLI
    can report it.
    """

    def __init__(self, message, name=None):
        super().__init__(message)
        self.name = name


class UndefinedConditionalError(MesinarError, ValueError):
    """Conditioning on an event of probability zero."""


class UndefinedStatisticError(MesinarError, ValueError):
    """A sample statistic is undefined (e.g. autocorrelation of a constant series)."""


class ConvergenceError(MesinarError, RuntimeError):
    """An iterative procedure failed to converge.

    ``best`` holds the best point found so far (may be ``None``).
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class SingularInformationError(MesinarError, ArithmeticError):
    """The observed information matrix cannot be inverted."""


class InfeasibleError(MesinarError, ValueError):
    """A moment system has no solution inside the parameter space."""
