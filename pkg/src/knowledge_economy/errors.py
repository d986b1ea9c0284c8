"""Exception hierarchy shared by the solvers and the CLI."""


class ModelError(Exception):
    """Base class for every error raised by this package."""


# distributions
class DistributionError(ModelError, ValueError):
    pass


class NonPositiveDensity(DistributionError):
    pass


class BadSupport(DistributionError):
    pass


class UnsortedKnots(DistributionError):
    pass


class OutOfSupport(DistributionError):
    pass


# numerics
class NumericsError(ModelError):
    pass


class NoSignChange(NumericsError, ValueError):
    pass


class MaxIterations(NumericsError):
    pass


class RangeExceeded(NumericsError):
    pass


class DegenerateInterval(NumericsError, ValueError):
    pass


class OutOfRange(NumericsError, ValueError):
    pass


class MaxDepth(NumericsError):
    pass


# model primitives
class DivergentSpan(ModelError, ValueError):
    pass


class PreconditionViolated(ModelError, ValueError):
    pass


class IdentityViolated(ModelError):
    pass


class InvalidParams(ModelError, ValueError):
    pass


# solvers
class SolverError(ModelError):
    pass


class NoConvergence(SolverError):
    pass


class AuditFailed(SolverError):
    pass


class AbundanceViolated(SolverError):
    pass


class NoConfigCertified(SolverError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = dict(residuals or {})


# analysis
class ParamsMismatch(ModelError, ValueError):
    pass


class NoCrossing(ModelError):
    pass
