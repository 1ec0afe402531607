"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the domain of a function (poles, r <= 0, bad angles)."""


class ConvergenceError(ArithmeticError):
    """A series failed to converge within its iteration cap.

    Carries the partial sum reached and a bound on the size of the last term.
    """

    def __init__(self, message, partial_sum=None, bound=None):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.bound = bound


class ResonanceError(ValueError):
    """Asymptotic amplitude has a pole: b - a is a nonpositive integer.

    Use the resonant polynomial solution for such parameters instead.
    """


class NotResonantError(ValueError):
    """A resonant-only construction was requested for a non-resonant mode."""


class AccuracyError(ArithmeticError):
    """Quadrature at two resolutions disagreed beyond tolerance."""


class PathError(ValueError):
    """A reduction-of-order integral would cross a node of the first solution."""


class AdmissibilityError(ValueError):
    """Trace data has mass on degrees the construction cannot reach."""

    def __init__(self, message, degrees=()):
        super().__init__(message)
        self.degrees = tuple(degrees)


class RegularityError(ValueError):
    """Trace coefficients do not decay fast enough for the construction."""


class NotComparableError(ValueError):
    """Two fields cannot be compared (different parameters or amplitudes)."""


class DataError(ValueError):
    """Malformed or insufficient sample data."""


class SeedError(ArithmeticError):
    """ODE integration could not leave the singular point; use a larger r_start."""


class ZeroFieldError(ArithmeticError):
    """The field vanishes identically at a radius where its growth was requested."""
