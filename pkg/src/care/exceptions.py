"""Exception hierarchy shared by all modules."""


class CareError(Exception):
    """Base class for every error raised by this package."""


class DataError(CareError, ValueError):
    """Input data violates a structural precondition."""


class NumericalError(CareError, ArithmeticError):
    """A numerical routine could not produce a trustworthy result."""


class InvalidMatrix(DataError):
    pass


class InvalidDimension(DataError):
    pass


class InvalidParameter(DataError):
    pass


class InvalidInput(DataError):
    pass


class NotStrictlyPositive(DataError):
    """Log-ratios are undefined for zero or negative parts."""


class EmptySample(DataError):
    pass


class InsufficientSamples(DataError):
    pass


class NotPositiveDefinite(NumericalError):
    pass


class RankDeficient(NumericalError):
    pass


class ConvergenceFailure(NumericalError):
    pass


class InfeasibleColumn(NumericalError):
    """A column problem has no feasible point at the requested lambda."""

    def __init__(self, column, lam):
        super().__init__(f"column {column} is infeasible at lambda={lam!r}")
        self.column = column
        self.lam = lam
