"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class CryptoBNError(Exception):
    """Base class for all package errors."""


# -- ingestion ---------------------------------------------------------------

class ParseError(CryptoBNError):
    def __init__(self, row: int, column: str, message: str = ""):
        self.row = row
        self.column = column
        detail = f": {message}" if message else ""
        super().__init__(f"cannot parse row {row}, column {column!r}{detail}")


class DuplicateDate(CryptoBNError):
    def __init__(self, date):
        self.date = date
        super().__init__(f"duplicate date {date}")


class EmptyIntersection(CryptoBNError):
    pass


class DuplicateColumnName(CryptoBNError):
    pass


class NonPositiveValue(CryptoBNError):
    pass


class AllMissing(CryptoBNError):
    pass


class TableError(CryptoBNError):
    """A TimeSeriesTable invariant was violated."""


# -- discretization ----------------------------------------------------------

class DegenerateRange(CryptoBNError):
    pass


class TooFewDistinctValues(CryptoBNError):
    pass


class DuplicateCutPoints(CryptoBNError):
    pass


class InvalidK(CryptoBNError):
    pass


# -- graph -------------------------------------------------------------------

class GraphError(CryptoBNError):
    pass


class WouldCreateCycle(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class UnknownNode(GraphError):
    pass


class StrengthOutOfRange(GraphError):
    pass


# -- learning ----------------------------------------------------------------

class EmptyEffectiveData(CryptoBNError):
    pass


class EmptyStratumData(CryptoBNError):
    pass


class ZeroRowWithoutSmoothing(CryptoBNError):
    pass


class MissingDataError(CryptoBNError):
    """Complete data was required but missing cells were found."""


class NoObservationsForVariable(CryptoBNError):
    pass


# -- inference ---------------------------------------------------------------

class ZeroProbabilityEvidence(CryptoBNError):
    pass


class UnknownVariable(CryptoBNError):
    pass


class InvalidEvidence(CryptoBNError):
    pass


class StateSpaceTooLarge(CryptoBNError):
    pass


class DegenerateRow(CryptoBNError):
    pass


# -- evaluation --------------------------------------------------------------

class TooFewRows(CryptoBNError):
    pass


class LengthMismatch(CryptoBNError):
    pass


class EmptyInput(CryptoBNError):
    pass


class SingleClass(CryptoBNError):
    pass


# -- cli ---------------------------------------------------------------------

class ConfigError(CryptoBNError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class UnknownStateLabel(CryptoBNError):
    def __init__(self, variable: str, label: str, valid: list[str]):
        self.variable = variable
        self.label = label
        self.valid = list(valid)
        super().__init__(
            f"unknown state {label!r} for {variable!r}; valid labels: {self.valid}"
        )
