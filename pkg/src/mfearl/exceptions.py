class MfeaError(Exception):
    """Base class for errors raised by this package."""


class DimensionMismatchError(MfeaError, ValueError):
    pass


class EmptyInputError(MfeaError, ValueError):
    pass


class UndefinedFitnessError(MfeaError, ValueError):
    pass


class InvalidInputError(MfeaError, ValueError):
    pass


class NumericError(MfeaError, FloatingPointError):
    pass


class DegenerateLabelsError(MfeaError, ValueError):
    pass


class BudgetError(MfeaError, ValueError):
    pass


class MismatchedRunsError(MfeaError, ValueError):
    pass
