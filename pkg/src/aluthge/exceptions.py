"""Exception and warning classes raised by the aluthge package."""


class AluthgeError(Exception):
    """Base class for all package errors."""


class NotHermitian(AluthgeError, ValueError):
    pass


class NoConvergence(AluthgeError, ArithmeticError):
    """An underlying LAPACK eigensolver or SVD did not converge."""


class SingularNegativePower(AluthgeError, ValueError):
    pass


class DimensionMismatch(AluthgeError, ValueError):
    pass


class NonFiniteInput(AluthgeError, ValueError):
    pass


class LambdaOutOfRange(AluthgeError, ValueError):
    pass


class NotDiagonalizable(AluthgeError, ValueError):
    pass


class SingularD(AluthgeError, ValueError):
    pass


class NotTangent(AluthgeError, ValueError):
    """A matrix has nonzero entries where the diagonal point has d_i == d_j."""


class InsufficientData(AluthgeError, ValueError):
    pass


class ConstructionFailed(AluthgeError, RuntimeError):
    pass


class DidNotConverge(AluthgeError, RuntimeError):
    """Raised by :func:`aluthge.transform.limit`; ``trace`` holds the full run."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class MatrixFormatError(AluthgeError, ValueError):
    pass


class NotDiagonalizableWarning(UserWarning):
    pass


class LimitCheckWarning(UserWarning):
    """A converged limit failed a post-hoc check (normality or spectrum)."""
