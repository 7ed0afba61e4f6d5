"""Exception types shared across the package."""


class KeyRateError(Exception):
    """Base class for every error raised by this package."""


class DomainError(KeyRateError, ValueError):
    """An argument lies outside its mathematical domain."""


class DegenerateParameterError(KeyRateError):
    """Protocol parameters leave no qubits in a required role."""


class BracketError(KeyRateError):
    """A root finder was called on a bracket without a sign change."""


class ConvergenceError(KeyRateError):
    """An iterative solver exhausted its iteration budget.

    The best iterate found so far is attached as ``best``.
    """

    def __init__(self, message: str, best: float | None = None):
        super().__init__(message)
        self.best = best


class NumericError(KeyRateError):
    """A numeric evaluation produced a non-finite or invalid value."""


class InfeasibleError(KeyRateError):
    """No point on the search bracket satisfies the requested constraint."""
