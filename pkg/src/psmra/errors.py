"""Exception hierarchy.  The CLI maps each family onto an exit code."""


class MRAError(Exception):
    """Base class for all package errors."""


class FieldError(MRAError, ValueError):
    pass


class ReduciblePolynomial(FieldError):
    pass


class DivisionByZero(FieldError, ZeroDivisionError):
    pass


class DimensionMismatch(MRAError, ValueError):
    pass


class NonCanonical(MRAError, ValueError):
    """A serialized subspace whose rows are not in reduced row-echelon form."""


class GeometryError(MRAError, ValueError):
    pass


class ConstraintViolation(MRAError, ValueError):
    pass


class NonBinaryField(ConstraintViolation):
    pass


class MalformedRule(MRAError, ValueError):
    pass


class MalformedMessage(MRAError, ValueError):
    pass


class TypeCheckFailed(MRAError, AssertionError):
    pass


class SamplingExhausted(MRAError, RuntimeError):
    pass


class BudgetExceeded(MRAError, RuntimeError):
    def __init__(self, what: str, estimate: int, limit: int):
        super().__init__(f"{what}: estimated cost {estimate} exceeds budget {limit}")
        self.what = what
        self.estimate = estimate
        self.limit = limit


class EmptyCoalition(MRAError, ValueError):
    pass


class FormatError(MRAError, ValueError):
    """Bad key/message/report/params file."""
