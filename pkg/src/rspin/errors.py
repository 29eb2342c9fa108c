"""Exception hierarchy shared by all rspin modules."""


class RSpinError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(RSpinError, ValueError):
    """Input data violates a documented precondition."""


class SingularMatrix(RSpinError):
    pass


class RankDeficient(RSpinError):
    pass


class DegenerateFactor(InvalidInput):
    """Two factor points of a rational form are closer than the margin."""


class EvaluationAtPole(RSpinError):
    pass


class NotAPole(RSpinError):
    pass


class NotASimplePole(NotAPole):
    pass


class DegenerateConfiguration(RSpinError):
    pass


class InvalidBaseParameters(InvalidInput):
    pass


class TrackingFailed(RSpinError):
    def __init__(self, step, residual, message=None):
        self.step = step
        self.residual = residual
        super().__init__(message or f"path tracking failed: step {step:.3g}, residual {residual:.3g}")


class DegenerateTarget(RSpinError):
    pass


class SolverExhausted(RSpinError):
    def __init__(self, message, attempts=()):
        self.attempts = list(attempts)
        super().__init__(message)


class PolynomialVanishesAtPole(RSpinError):
    pass


class InvalidCaseData(InvalidInput):
    pass


class AuxiliarySolutionMismatch(InvalidInput):
    pass


class DisconnectedCurve(RSpinError):
    pass


class PreimageNotSimplePole(RSpinError):
    pass


class BasisPoleAtNode(RSpinError):
    pass


class OutsideClassificationTable(InvalidInput):
    pass


class InvalidCurve(InvalidInput):
    """A NodalCurve violates its structural invariants."""
