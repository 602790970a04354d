"""Exception hierarchy shared by every module of the package."""


class FracSobolevError(Exception):
    """Base class for all errors raised by fracsobolev."""


# numerics
class NotSPD(FracSobolevError, ValueError):
    pass


class DimensionMismatch(FracSobolevError, ValueError):
    pass


class MaxDepthExceeded(FracSobolevError, ArithmeticError):
    """Adaptive quadrature could not meet its tolerance.

    The partial value and the achieved error estimate are kept on the
    exception so callers can decide whether the result is still usable.
    """

    def __init__(self, message, value=float("nan"), error=float("inf")):
        super().__init__(message)
        self.value = value
        self.error = error


class NonFiniteSample(FracSobolevError, ArithmeticError):
    pass


class DegenerateFit(FracSobolevError, ValueError):
    pass


# mesh
class InvalidCount(FracSobolevError, ValueError):
    pass


class InvalidGrading(FracSobolevError, ValueError):
    pass


class UnalignedBreakpoint(FracSobolevError, ValueError):
    pass


# funcspec
class ExprSyntaxError(FracSobolevError, ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownIdentifier(FracSobolevError, ValueError):
    def __init__(self, name):
        super().__init__(f"unknown identifier {name!r}")
        self.name = name


class DomainError(FracSobolevError, ArithmeticError):
    pass


class InvalidEpsilon(FracSobolevError, ValueError):
    pass


# assembly / interpolation norms
class NonzeroTrace(FracSobolevError, ValueError):
    pass


class BasisMismatch(FracSobolevError, ValueError):
    pass


class SolveFailure(FracSobolevError, ArithmeticError):
    pass


class ThetaOutOfRange(FracSobolevError, ValueError):
    pass


class GridTooCoarse(FracSobolevError, ValueError):
    pass


# slobodetskij
class DivergentIntegral(FracSobolevError, ArithmeticError):
    pass


class XOutsideInner(FracSobolevError, ValueError):
    pass


# bem
class DegenerateInterval(FracSobolevError, ValueError):
    pass


class SingularBlock(FracSobolevError, ArithmeticError):
    pass


class MaxIterExceeded(FracSobolevError, ArithmeticError):
    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats
