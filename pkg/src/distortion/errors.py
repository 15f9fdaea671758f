"""Exception hierarchy.

Every error raised by the package derives from :class:`DistortionError`;
argument-domain violations additionally derive from :class:`ValueError` so
callers that only know the standard library can still catch them.
"""


class DistortionError(Exception):
    """Base class for all package errors."""


class DomainError(DistortionError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


# mat2
class NegativeDeterminant(DomainError):
    pass


class NonpositiveDeterminant(DomainError):
    pass


class ZeroMatrix(DomainError):
    pass


class ParameterOutOfRange(DomainError):
    pass


# bounds
class NegativeRatio(DomainError):
    pass


class PowerBelowTwo(DomainError):
    pass


# costfn
class NonpositiveArgument(DomainError):
    pass


class NonpositiveRatio(DomainError):
    pass


class InvalidCostFunction(DomainError):
    pass


# maps
class RadiusOutOfDomain(DomainError):
    pass


class LambdaOutOfRange(DomainError):
    pass


class AlphaTooSmall(DomainError):
    pass


class BisectionFailed(DistortionError):
    pass


class UnsupportedDomain(DomainError):
    pass


# energy
class ResolutionTooLow(DomainError):
    pass


class MapEvaluationFailure(DistortionError):
    pass


class NonpositiveSingularValue(DomainError):
    pass


class VolumeInconsistent(DomainError):
    pass


# criticality
class EvaluationMargin(DomainError):
    pass


class GridTooSmall(DomainError):
    pass


class SingularNode(DistortionError):
    pass
