"""Exception hierarchy shared by every module."""


class DigraphonError(Exception):
    """Base class for all library errors."""


class ValidationError(DigraphonError, ValueError):
    """Input violates a structural invariant."""


class MeasureSum(ValidationError):
    pass


class NonPositiveMeasure(ValidationError):
    pass


class ValueRange(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class EmptyDigraph(ValidationError):
    pass


class SelfLoop(ValidationError):
    pass


class EmptyRestriction(ValidationError):
    pass


class RefinementOverflow(ValidationError):
    pass


class ParseError(ValidationError):
    """Malformed serialized input; carries the offending line and field when known."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class TooManyVertices(DigraphonError):
    pass


class TooLarge(DigraphonError):
    pass


class EqualBlocksRequired(DigraphonError):
    pass


class NotOriented(DigraphonError):
    pass


class NotAComponent(DigraphonError):
    pass


class NotFragmented(DigraphonError):
    pass


class Unreachable(DigraphonError):
    pass


class ConvergenceFailure(DigraphonError):
    pass


class NotStronglyConnected(DigraphonError):
    pass


class ZeroSpectralRadius(DigraphonError):
    pass


class UnequalCells(DigraphonError):
    pass


class Acyclic(DigraphonError):
    pass


class CellBudgetExceeded(DigraphonError):
    """Raised when the cell budget runs out; ``partition`` holds the best effort."""

    def __init__(self, message, partition=None):
        super().__init__(message)
        self.partition = partition
