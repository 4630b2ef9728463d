"""Exception hierarchy shared by every selgroup module."""

from __future__ import annotations


class SelgroupError(Exception):
    """Base class for all errors raised by selgroup."""


class InvalidParameter(SelgroupError, ValueError):
    pass


class DensityUnavailable(SelgroupError):
    """Raised when a density is requested from a distribution without one."""


class QuadratureFailure(SelgroupError, ArithmeticError):
    pass


class UnknownTransform(SelgroupError, KeyError):
    pass


class NotApplicable(SelgroupError, ValueError):
    pass


class NegativeThreshold(SelgroupError, ValueError):
    pass


class ZeroCoverage(SelgroupError, ArithmeticError):
    pass


class DegenerateTail(SelgroupError, ArithmeticError):
    pass


class DegenerateSample(SelgroupError, ValueError):
    pass


class NonpositiveDensity(SelgroupError, ValueError):
    pass


class EmptyInput(SelgroupError, ValueError):
    pass


class WeightMismatch(SelgroupError, ValueError):
    pass


class NoPredictions(SelgroupError, ValueError):
    pass


class TooLarge(SelgroupError, ValueError):
    pass


class UndefinedRate(SelgroupError, ArithmeticError):
    pass


class ZeroMass(SelgroupError, ArithmeticError):
    pass


class NotLogConcave(SelgroupError, ValueError):
    pass


class UnsupportedFormat(SelgroupError, ValueError):
    pass


class OutOfRange(SelgroupError, ValueError):
    pass


class NegativeConfidence(SelgroupError, ValueError):
    pass


class SchemaError(SelgroupError, ValueError):
    """Input header or keys do not match the record schema."""


class EmptyFile(SelgroupError, ValueError):
    pass


class ParseError(SelgroupError, ValueError):
    """A malformed record; ``line`` is 1-based in the source stream."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class DistSpecError(SelgroupError, ValueError):
    """Distribution spec string failed to parse; ``pos`` is a 0-based offset."""

    def __init__(self, text: str, pos: int, message: str):
        self.text = text
        self.pos = pos
        self.message = message
        super().__init__(f"{message}\n  {text}\n  {' ' * pos}^")
