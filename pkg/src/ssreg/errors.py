"""Exception hierarchy shared by the solvers, estimators and harness."""


class SSRegError(Exception):
    """Base class for all package errors."""


class InputError(SSRegError, ValueError):
    """Malformed or non-finite input."""


class FeasibilityError(SSRegError):
    """A constrained program has no feasible point at the requested bound.

    ``constraint`` names the offending constraint family and ``residual``
    is the smallest achievable violation (or the violation at the returned
    point) when known.
    """

    def __init__(self, message, constraint=None, residual=None):
        super().__init__(message)
        self.constraint = constraint
        self.residual = residual


class ConvergenceError(SSRegError):
    """An iterative nuisance fit exhausted its budget without converging."""


class DegenerateError(SSRegError, ArithmeticError):
    """A ratio estimator hit a (numerically) zero denominator."""


class LoadError(SSRegError, ValueError):
    """CSV ingestion failure; message carries the file, row and column."""
