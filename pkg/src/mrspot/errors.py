"""Exception hierarchy.

``ValidationError`` covers bad inputs (CLI exit code 2); ``PreconditionError``
covers well-formed inputs that fall outside what a closed form supports (exit 3).
"""

from __future__ import annotations


class ModelError(ValueError):
    """Base class for every error raised by the library."""


class ValidationError(ModelError):
    pass


class PreconditionError(ModelError):
    pass


class NonPositiveBeta(ValidationError):
    pass


class NonPositiveSigmaFactor(ValidationError):
    pass


class NegativeSigma(ValidationError):
    pass


class SeasonalityNotPositive(ValidationError):
    pass


class StateLengthMismatch(ValidationError):
    pass


class NonFiniteValue(ValidationError):
    pass


class NonPositiveHalfLife(ValidationError):
    pass


class EmptyHorizon(ValidationError):
    pass


class TimeOrderViolation(ValidationError):
    pass


class UnsortedGrid(ValidationError):
    pass


class BadNodeCount(ValidationError):
    pass


class InvalidSubset(ValidationError):
    pass


class InvalidStrike(ValidationError):
    pass


class NegativeRate(ValidationError):
    pass


class ZeroVolatility(PreconditionError):
    pass


class ZeroSigmaB(PreconditionError):
    pass


class NonzeroRateUnsupported(PreconditionError):
    pass


class RegimeNotCovered(PreconditionError):
    pass
