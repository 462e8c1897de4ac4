"""Exception hierarchy shared across the package."""


class GensecError(Exception):
    """Base class for every error raised by gensec."""


class SingularOperator(GensecError):
    pass


class NonFiniteEvaluation(GensecError):
    pass


class DegeneratePoints(GensecError):
    pass


class UnboundedDomain(GensecError):
    pass


class NoAnalyticProjection(GensecError):
    pass


class MaxInnerIterations(GensecError):
    pass


class SubproblemError(GensecError):
    """Any failure of the linearized inclusion solver."""


class SubproblemSingular(SubproblemError):
    pass


class SubproblemInfeasible(SubproblemError):
    pass


class SubproblemNoConvergence(SubproblemError):
    pass


class DimensionTooLarge(GensecError):
    pass


class ZeroStep(GensecError):
    pass


class MissingJacobian(GensecError):
    pass


class InfeasibleStart(GensecError):
    pass


class InsufficientTrace(GensecError):
    pass


class MissingGroundTruth(GensecError):
    pass


class ProblemFileError(GensecError):
    """Malformed problem or set description."""
