"""Exception types raised across the package."""


class MadelungError(Exception):
    pass


class ExponentMinusOne(MadelungError, ValueError):
    """Antiderivative of x**-1 is a logarithm, which the term algebra cannot hold."""


class EvalAtSingularity(MadelungError, ValueError):
    pass


class SeriesNotConverged(MadelungError, ArithmeticError):
    def __init__(self, last_term, k_max):
        self.last_term = float(last_term)
        self.k_max = k_max
        super().__init__(
            f"series for F did not reach tolerance after {k_max} terms "
            f"(last term magnitude {self.last_term:.3e})"
        )


class PrefactorSingular(MadelungError, ZeroDivisionError):
    pass


class AmplitudeZero(MadelungError, ZeroDivisionError):
    pass


class NegativeDiscriminant(MadelungError, ValueError):
    pass


class InvariantViolation(MadelungError, ValueError):
    pass


class StencilInExclusionZone(MadelungError, ValueError):
    pass


class TrajectoryHitSingularity(MadelungError, ArithmeticError):
    def __init__(self, bad, message="characteristic trajectory hit a singularity of Q'"):
        self.bad = bad
        super().__init__(message)


class SchemaError(MadelungError, ValueError):
    pass


class GridMismatch(MadelungError, ValueError):
    pass


class EvaluationError(MadelungError):
    """Field evaluation failed on part of a grid; message carries the (x, t) window."""
