"""Exception types shared across the package."""


class EradoptError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(EradoptError, ValueError):
    """A parameter set or model specification violates an invariant."""


class NegativeStateError(EradoptError, ValueError):
    """A state component is negative beyond the roundoff tolerance."""


class BlowUpError(EradoptError, RuntimeError):
    """Forward integration exceeded the divergence guard.

    Attributes:
        t: last time at which the state was still inside the guard.
        state: the offending state vector (f, m, s).
    """

    def __init__(self, t, state, guard):
        self.t = t
        self.state = tuple(state)
        self.guard = guard
        super().__init__(
            f"state exceeded divergence guard {guard:g} at t={t:g}: {self.state}"
        )


class GridMismatchError(EradoptError, ValueError):
    """Two grid-indexed objects do not share the same time grid."""


class DegenerateError(EradoptError, ArithmeticError):
    """Cubic classification hit a degenerate (repeated-root-at-zero) case."""


class SingularDerivativeError(EradoptError, ArithmeticError):
    """Jacobian requested where a harvesting derivative is singular."""


class UnsupportedModelError(EradoptError, ValueError):
    """The requested analysis is not defined for this model."""


class FitDivergedError(EradoptError, RuntimeError):
    """The simplex search collapsed without meeting its tolerance."""
