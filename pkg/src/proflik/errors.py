"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`ProflikError`.  Input-validation failures additionally derive from
:class:`ValueError` so callers that only know about the builtin still catch
them.
"""


class ProflikError(Exception):
    """Base class for all package errors."""


class InvalidInput(ProflikError, ValueError):
    """A precondition on the arguments was violated."""


class TooFewObservations(InvalidInput):
    pass


class DegenerateSample(ProflikError):
    """The nuisance supremum is infinite (zero sum of squares / RSS)."""


class SingularScatter(DegenerateSample):
    """The scatter matrix A(mu) is not positive definite."""


class NotPositiveDefinite(InvalidInput):
    pass


class NonpositiveVariance(InvalidInput):
    pass


class RankDeficientDesign(InvalidInput):
    pass


class GridMismatch(InvalidInput):
    pass


class GridTooNarrow(InvalidInput):
    pass


class TooFewDraws(InvalidInput):
    pass


class InvalidInit(InvalidInput):
    pass


class NonConvergence(ProflikError):
    pass


class DomainEscape(ProflikError):
    pass


class ToleranceNotMet(ProflikError):
    """Adaptive quadrature ran out of subdivisions.

    ``achieved`` holds the final error estimate of the log integral.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class DivergentIntegral(ProflikError):
    pass


class EffectiveSampleSizeTooLow(ProflikError):
    def __init__(self, message, ess=None):
        super().__init__(message)
        self.ess = ess


class NoSamplerAvailable(ProflikError):
    pass


class NonFiniteHessian(ProflikError):
    pass


class ScanFailed(ProflikError):
    """More than half of the cells of a discrepancy scan failed."""
