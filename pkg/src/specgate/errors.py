"""Exception hierarchy.

Every error raised on purpose by the package derives from ``SpecGateError``.
Input problems are ``ValidationError`` (a ``ValueError``); failures of a
numerical routine to deliver are ``NumericalError``.  The CLI maps the two
families to exit codes 2 and 3.
"""

from __future__ import annotations


class SpecGateError(Exception):
    """Base class for all package errors."""


class ValidationError(SpecGateError, ValueError):
    """An argument is outside the documented domain."""


class NumericalError(SpecGateError, ArithmeticError):
    """A numerical routine could not produce a trustworthy answer."""


# measure spaces and rearrangements
class EmptySpace(ValidationError):
    pass


class NonPositiveT(ValidationError):
    pass


class TOutOfRange(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


# set optimisation
class TooManyAtoms(ValidationError):
    pass


class BadTheta(ValidationError):
    pass


class NegativeValues(ValidationError):
    pass


# Lagrangian bound
class NotProbability(ValidationError):
    pass


class TOutOfHalfOpen(ValidationError):
    pass


class NonPositiveLambda(ValidationError):
    pass


# windows
class NegativeSamples(ValidationError):
    pass


class EvaluationDomain(ValidationError):
    pass


class EmptyXi(ValidationError):
    pass


class MaskMissing(ValidationError):
    pass


class BadGamma(ValidationError):
    pass


# potentials
class UnknownKind(ValidationError):
    pass


class DomainX(ValidationError):
    pass


class BadParameter(ValidationError):
    pass


# divergence equation
class WrongKind(ValidationError):
    pass


class DLessThan3(ValidationError):
    pass


class WrongTopology(ValidationError):
    pass


class NonZeroMean(ValidationError):
    pass


class BoundaryViolation(ValidationError):
    pass


class UncertifiedDimension(ValidationError):
    pass


# eigenvalue lab
class ResolutionTooLow(ValidationError):
    pass


class NoConvergence(NumericalError):
    pass


class DegenerateVolume(NumericalError):
    pass


# command line and I/O
class UnknownCommand(ValidationError):
    pass


class BadFlag(ValidationError):
    pass


class IoFailure(SpecGateError, OSError):
    pass
