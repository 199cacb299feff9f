"""Exception hierarchy shared across the package."""


class TsvarError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(TsvarError, ValueError):
    """Expression text does not conform to the grammar."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class EvalError(TsvarError, ValueError):
    """Evaluating an expression failed (unbound variable or domain error)."""

    def __init__(self, message: str, subexpr: str | None = None):
        if subexpr is not None:
            message = f"{message} in '{subexpr}'"
        super().__init__(message)
        self.subexpr = subexpr


class ScaleMismatchError(TsvarError, ValueError):
    """Two grids that should share one time scale do not."""


class AdmissibilityError(TsvarError, ValueError):
    """A candidate trajectory violates the problem's admissibility rules."""


class DynamicsViolationError(AdmissibilityError):
    """A state/control pair does not satisfy the control dynamics."""


class SolveError(TsvarError, RuntimeError):
    """A solver failed in a way that yields no usable iterate."""


class SingularJacobianError(SolveError):
    """Newton iteration hit a (numerically) singular Jacobian."""


class OracleError(TsvarError, ValueError):
    """The brute-force oracle does not support the given problem class."""


class ProblemFileError(TsvarError, ValueError):
    """A problem file failed to load; message carries a line number."""
