"""Exception hierarchy for cutoff_lab."""


class CutoffLabError(ValueError):
    """Base class for all domain errors raised by this package."""


# mixtures
class EmptyMixture(CutoffLabError):
    pass


class NonpositiveRate(CutoffLabError):
    pass


class LeadingCoefficientZero(CutoffLabError):
    pass


class ExponentAtPole(CutoffLabError):
    pass


# analysis
class LocationNotPositive(CutoffLabError):
    """Location is zero or infinite, so the cutoff analysis does not apply."""


class CorrectionUndefined(CutoffLabError):
    """rho_1 * t <= 1: the log-log correction is not a real number."""


class EpsilonOutOfRange(CutoffLabError):
    pass


class EvaluationTimeNegative(CutoffLabError):
    pass


class EmptyIStarSet(CutoffLabError):
    pass


# families
class CoefficientNotAboveOne(CutoffLabError):
    pass


class IndexTooSmall(CutoffLabError):
    pass


class GammaNonpositive(CutoffLabError):
    pass


class BetaOutOfRange(CutoffLabError):
    pass


class UnknownDescriptor(CutoffLabError):
    pass


# spectral
class InvalidGenerator(CutoffLabError):
    pass


class NotIrreducible(CutoffLabError):
    pass


class NotReversible(CutoffLabError):
    pass


class DegenerateLeadingTerm(CutoffLabError):
    pass


# harness
class ToleranceNotMet(CutoffLabError):
    def __init__(self, message, worst=None):
        super().__init__(message)
        self.worst = worst


class IoFailure(OSError):
    pass
