"""Exception hierarchy shared by all engines."""


class SingularEigError(Exception):
    """Base class for every error raised by the package."""


class NonElliptic(SingularEigError, ValueError):
    pass


class DimensionLikeTooSmall(SingularEigError, ValueError):
    pass


class NonpositiveRadius(SingularEigError, ValueError):
    pass


class UnsupportedOperator(SingularEigError, ValueError):
    pass


class BadTau(SingularEigError, ValueError):
    pass


class NoContraction(SingularEigError):
    pass


class SeedRadiusTooLarge(SingularEigError):
    pass


class StepSizeUnderflow(SingularEigError):
    pass


class NoZeroFound(SingularEigError):
    """Raised when the shooting solution stays positive up to ``r_max``.

    The partial profile is attached as ``profile`` for diagnostics.
    """

    def __init__(self, message, profile=None):
        super().__init__(message)
        self.profile = profile


class ZeroDenominator(SingularEigError, ZeroDivisionError):
    pass


class MeshTooCoarse(SingularEigError):
    pass


class SingularSystem(SingularEigError):
    pass


class DivergentIteration(SingularEigError):
    def __init__(self, message, iterations=None, norms=None):
        super().__init__(message)
        self.iterations = iterations
        self.norms = norms


class PolicyCycle(SingularEigError):
    pass


class NoConvergence(SingularEigError):
    pass


class PreconditionResidualFailure(SingularEigError):
    pass
