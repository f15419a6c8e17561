"""Exception types raised by the solver."""


class SavmagError(Exception):
    """Base class for all solver errors."""


class GridMismatch(SavmagError, ValueError):
    pass


class DegenerateProjection(SavmagError, ArithmeticError):
    """A cell of the predictor has (near) zero length and cannot be normalized."""


class NegativeEnergy(SavmagError, ArithmeticError):
    """Magnetostatic energy came out negative beyond rounding; the kernel is broken."""


class DegenerateSav(SavmagError, ArithmeticError):
    pass


class SingularScalarSolve(SavmagError, ArithmeticError):
    pass


class NegativeAux(SavmagError, ArithmeticError):
    pass


class NoConvergence(SavmagError, RuntimeError):
    pass


class SingularCellSystem(SavmagError, ArithmeticError):
    pass


class UnknownPreset(SavmagError, KeyError):
    pass


class ConfigError(SavmagError, ValueError):
    pass
