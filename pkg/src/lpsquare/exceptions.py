"""Exception types raised by the workbench."""


class LPSquareError(Exception):
    """Base class for all workbench errors."""


class DomainError(LPSquareError, ValueError):
    """An argument lies outside the domain of an operation."""


class ParameterError(DomainError):
    """Operator parameters violate an admissibility constraint.

    ``constraint`` names the violated inequality, e.g. ``"beta >= rho - n/2"``.
    """

    def __init__(self, constraint, message=None):
        self.constraint = constraint
        super().__init__(message or f"inadmissible parameters: {constraint}")


class DegenerateShapeError(DomainError):
    """Moment projection annihilated the profile (the shape was a polynomial)."""


class PackingError(DomainError):
    """A weak-Hardy plan violates its measure budget or disjointness."""


class TruncationError(LPSquareError):
    """A truncated integral is not resolved to the requested tolerance.

    ``suggested`` carries a parameter value (``t_max``, ``t_min`` or a window
    size) that is expected to resolve it.
    """

    def __init__(self, message, suggested=None):
        self.suggested = suggested
        super().__init__(message)


class WindowError(TruncationError):
    """The evaluation window does not contain the required dilated balls."""


