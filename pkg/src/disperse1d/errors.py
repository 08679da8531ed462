"""Exception types raised across the package."""


class Disperse1DError(Exception):
    """Base class for all package errors."""


class NonFiniteParameter(Disperse1DError, ValueError):
    pass


class EmptyTable(Disperse1DError, ValueError):
    pass


class DivergentMoment(Disperse1DError, ArithmeticError):
    pass


class StepFailure(Disperse1DError, ArithmeticError):
    """ODE integration overflowed or could not meet its tolerance."""

    def __init__(self, msg, k=None):
        super().__init__(msg)
        self.k = k


class WronskianDrift(Disperse1DError, ArithmeticError):
    pass


class NonRealKernel(Disperse1DError, ArithmeticError):
    pass


class InteriorZero(Disperse1DError, ArithmeticError):
    pass


class MissedRootSuspected(UserWarning):
    pass


class NoLimitAtInfinity(Disperse1DError, ValueError):
    pass


class ResonantInput(Disperse1DError, ValueError):
    pass


class SlowConvergence(UserWarning):
    pass


class NoConvergence(Disperse1DError, ArithmeticError):
    pass


class BoundViolated(Disperse1DError, AssertionError):
    pass


class NonFiniteMass(Disperse1DError, ValueError):
    pass


class TooLarge(Disperse1DError, ValueError):
    pass


class NegativeFrequency(Disperse1DError, ArithmeticError):
    pass


class ZeroTime(Disperse1DError, ValueError):
    pass


class NonPositiveValue(Disperse1DError, ValueError):
    pass


class SpectralLeakage(Disperse1DError, ArithmeticError):
    pass


class ParseError(Disperse1DError, ValueError):
    """Config parse failure; carries 1-based line/column when known."""

    def __init__(self, msg, line=None, column=None):
        where = ""
        if line is not None:
            where = f" (line {line}, column {column})"
        super().__init__(msg + where)
        self.line = line
        self.column = column
