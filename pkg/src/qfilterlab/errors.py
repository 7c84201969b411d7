"""Exception hierarchy shared by every qfilterlab module."""


class QFilterError(Exception):
    """Base class for all errors raised by qfilterlab."""


class DimensionMismatch(QFilterError, ValueError):
    pass


class NotHermitian(QFilterError, ValueError):
    pass


class NonHermitianObservable(NotHermitian):
    pass


class ZeroProbabilityOutcome(QFilterError, ValueError):
    pass


class IncompatibleObservable(QFilterError, ValueError):
    """Operator does not commute with the conditioning projections."""


class DegenerateBlock(QFilterError, ValueError):
    pass


class NonFaithfulState(QFilterError, ValueError):
    pass


class UnboundSymbol(QFilterError, KeyError):
    pass


class ItoSyntaxError(QFilterError, ValueError):
    """Parse failure in an increment expression.

    ``pos`` is the 0-based character offset and ``expected`` the set of
    token descriptions that would have been accepted there.
    """

    def __init__(self, message, text, pos, expected=()):
        self.text = text
        self.pos = pos
        self.expected = tuple(sorted(expected))
        detail = f"{message} at position {pos}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class StepTooLarge(QFilterError, ArithmeticError):
    pass


class PositivityViolation(QFilterError, ArithmeticError):
    pass


class ScatteringNotSupported(QFilterError, ValueError):
    pass


class CollapsedNorm(QFilterError, ArithmeticError):
    pass


class NormOverflow(QFilterError, ArithmeticError):
    pass


class TruncationTooCoarse(QFilterError, ArithmeticError):
    pass


class NonpositiveVariance(QFilterError, ValueError):
    pass


class ZeroEvidence(QFilterError, ArithmeticError):
    pass


class CFLViolation(QFilterError, ValueError):
    pass


class SupportClipped(QFilterError, ValueError):
    pass


class ZeroDensityPointer(QFilterError, ArithmeticError):
    pass


class ConfigParseError(QFilterError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


class ExperimentUnknown(QFilterError, KeyError):
    pass
