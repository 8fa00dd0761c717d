"""Exception hierarchy.

Every error carries a stable ``exit_code`` used by the command-line front end.
"""

from __future__ import annotations


class FixpointError(Exception):
    exit_code = 12


class ParseError(FixpointError):
    exit_code = 3

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaError(FixpointError, ValueError):
    exit_code = 4


class NotNormal(FixpointError):
    exit_code = 5


class Undecided(FixpointError):
    exit_code = 6


class InternalDisagreement(FixpointError):
    exit_code = 7


class NotAscendingStart(FixpointError):
    exit_code = 8


class ContractionViolated(FixpointError):
    exit_code = 9

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class MaxIterExceeded(FixpointError):
    exit_code = 10

    def __init__(self, message: str, run=None):
        super().__init__(message)
        self.run = run


class RouteDisagreement(FixpointError):
    exit_code = 11


class NotAscending(FixpointError):
    """Raised only when ``require_ascending`` is set."""

    exit_code = 13


# Argument validation. These are also ValueErrors so plain callers can catch them as such.

class InvalidInput(FixpointError, ValueError):
    exit_code = 14


class InvalidTolerance(InvalidInput):
    exit_code = 15


class BadRightHandSide(InvalidInput):
    exit_code = 16


class DimensionMismatch(InvalidInput):
    exit_code = 17


class InvalidP(InvalidInput):
    exit_code = 18


class InvalidAlpha(InvalidInput):
    exit_code = 19


class NonpositiveAlpha(InvalidAlpha):
    exit_code = 20


class AlphaOutOfRange(InvalidAlpha):
    exit_code = 21


class IncomparablePair(InvalidInput):
    exit_code = 22


class CoincidentPair(InvalidInput):
    exit_code = 23


class InvalidMetric(InvalidInput):
    exit_code = 24


def _classes(cls):
    yield cls
    for sub in cls.__subclasses__():
        yield from _classes(sub)


EXIT_CODES = {"ok": 0, "usage": 2}
EXIT_CODES.update(sorted(((c.__name__, c.exit_code) for c in _classes(FixpointError)), key=lambda kv: kv[1]))
