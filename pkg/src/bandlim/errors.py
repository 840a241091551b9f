"""Exception taxonomy and the CLI exit-code map.

Every failure mode that can cross a module boundary has a dedicated
exception class; the CLI maps each to a fixed exit code so scripted
callers never have to parse messages.
"""


class BandlimError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class DivisionByZero(BandlimError):
    """A divisor was exactly zero, or its enclosure could not be
    separated from zero at the working precision."""

    exit_code = 1


class DocumentSyntaxError(BandlimError):
    """Description document failed to tokenize or parse."""

    exit_code = 1

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class ValidationError(BandlimError):
    """Parsed document violates a structural invariant (unbound
    variable, malformed sum, missing field, inconsistent header)."""

    exit_code = 1


class UnsupportedExponent(BandlimError):
    """Interpolation requested for p in {1, inf}; refused."""

    exit_code = 2


class MissingConstant(BandlimError):
    """No norm-equivalence constant configured for this exponent."""

    exit_code = 3


class NotIntegrable(BandlimError):
    """The alternating coefficient sum is certified nonzero, so the
    signal is not in the integrable class."""

    exit_code = 4


class Inconclusive(BandlimError):
    """A semidecision could not be settled at the working precision;
    the caller may retry with more precision."""

    exit_code = 5


class ResourceLimit(BandlimError):
    """A configured budget (window size, panels, boxes, machine steps)
    would be exceeded."""

    exit_code = 6


class GeneratorFailure(BandlimError):
    """A generator or modulus program raised during evaluation."""

    exit_code = 1


class MalformedProgram(BandlimError):
    """A machine program file is syntactically or semantically invalid."""

    exit_code = 1
