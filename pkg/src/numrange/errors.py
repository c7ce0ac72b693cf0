"""Exception hierarchy shared by every module of the package."""


class NumRangeError(Exception):
    """Base class for all errors raised by numrange."""


class DimensionMismatch(NumRangeError, ValueError):
    pass


class NonFinite(NumRangeError, ValueError):
    pass


class RankDeficient(NumRangeError, ValueError):
    pass


class NotHermitian(NumRangeError, ValueError):
    pass


class NotUnit(NumRangeError, ValueError):
    pass


class NotNormal(NumRangeError, ValueError):
    pass


class EmptySet(NumRangeError, ValueError):
    pass


class NotARefinement(NumRangeError, ValueError):
    pass


class ValidationFailed(NumRangeError, ValueError):
    """A user supplied projection does not commute with the matrix."""

    def __init__(self, residual: float, tol: float):
        super().__init__(f"||PA - AP||_F = {residual:.3e} exceeds tolerance {tol:.3e}")
        self.residual = residual
        self.tol = tol


class NoConvergence(NumRangeError, ArithmeticError):
    """An eigensolver hit its iteration cap.

    ``values`` holds the current diagonal estimates and ``converged`` flags
    the entries that had already deflated when the cap was reached.
    """

    def __init__(self, message, values=None, converged=None):
        super().__init__(message)
        self.values = values
        self.converged = converged


class Malformed(NumRangeError, ValueError):
    """Input file could not be parsed; ``position`` locates the problem."""

    def __init__(self, message: str, position: str):
        super().__init__(f"{position}: {message}")
        self.position = position
