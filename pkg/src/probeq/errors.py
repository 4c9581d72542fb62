"""Exception types raised across the package."""


class ProbeqError(Exception):
    pass


class DimError(ProbeqError, ValueError):
    pass


class Singular(ProbeqError, ArithmeticError):
    """Matrix is not invertible. Callers that sample points resample."""


class EvalError(ProbeqError, ArithmeticError):
    pass


class SymbolError(ProbeqError, KeyError):
    pass


class AlphabetError(ProbeqError, ValueError):
    pass


class CounterArityError(ProbeqError, ValueError):
    pass


class BudgetError(ProbeqError):
    pass


class NotWellMatched(ProbeqError, ValueError):
    pass


class BadPrime(ProbeqError, ArithmeticError):
    pass


class NeedsSubElimination(ProbeqError, ValueError):
    pass


class NotNormalized(ProbeqError, ValueError):
    pass


class ParseError(ProbeqError, ValueError):
    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class ValidationError(ProbeqError, ValueError):
    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)
