"""Exception hierarchy.

``DataError`` covers problems with the caller's input, ``NumericalError`` covers
estimation breakdowns on otherwise valid input. The CLI maps them to exit codes
2 and 3 respectively.
"""


class HDTSError(Exception):
    """Base class for all package errors."""


class DataError(HDTSError, ValueError):
    """Invalid or malformed input data."""


class NumericalError(HDTSError, ArithmeticError):
    """A numerical procedure could not produce a result."""


class InvalidData(DataError):
    pass


class ShapeError(DataError):
    pass


class LagOutOfRange(DataError):
    pass


class InvalidThreshold(DataError):
    pass


class DegenerateColumn(DataError):
    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"column {column} has zero sample variance")


class DimensionTooSmall(DataError):
    pass


class InvalidPair(DataError):
    pass


class InvalidRanks(DataError):
    pass


class InvalidCoefficients(DataError):
    pass


class InsufficientData(DataError):
    pass


class NotSymmetric(DataError):
    pass


class SingularDesign(NumericalError):
    pass


class SingularMatrix(NumericalError):
    pass


class DegenerateSpectrum(NumericalError):
    pass


class DegenerateXi(NumericalError):
    pass


class RankDeficientPencil(NumericalError):
    pass


class RefinementSingular(NumericalError):
    pass


class BandwidthUndefined(NumericalError):
    pass


class NumericalFailure(NumericalError):
    pass
