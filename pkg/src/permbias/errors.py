"""Exception types raised by permbias.

Every error derives from :class:`PermBiasError`, itself a ``ValueError``, so
callers that only care about "bad input" can catch ``ValueError``.
"""


class PermBiasError(ValueError):
    """Base class for all validation errors raised by this package."""


class NonPositiveWeight(PermBiasError):
    pass


class DuplicateLabel(PermBiasError):
    pass


class TooFewObjects(PermBiasError):
    pass


class DimensionMismatch(PermBiasError):
    pass


class InvalidPermutation(PermBiasError):
    pass


class DegenerateUniform(PermBiasError):
    pass


class TooLargeForExact(PermBiasError):
    pass


class NonPositiveP(PermBiasError):
    pass


class TooFewPoints(PermBiasError):
    pass


class DegenerateDesign(PermBiasError):
    pass


class ProbabilityOutOfRange(PermBiasError):
    pass


class MalformedRow(PermBiasError):
    pass


class RankGap(PermBiasError):
    pass


class DuplicateTeamInSeason(PermBiasError):
    pass
