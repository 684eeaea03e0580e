"""Exception hierarchy shared by all modules."""


class MCTMError(Exception):
    """Base class for errors raised by this package."""


class InvalidConfigError(MCTMError, ValueError):
    """A parameter or configuration value is outside its valid range."""


class DegenerateColumnError(MCTMError, ValueError):
    """A data column has zero range and cannot be mapped onto the basis domain."""

    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column!r} is constant; cannot fit basis bounds")


class NonpositiveLogArgumentError(MCTMError, ArithmeticError):
    """The derivative inner product is not positive while no floor is active."""

    def __init__(self, cell, value):
        self.cell = tuple(int(c) for c in cell)
        self.value = float(value)
        super().__init__(
            f"nonpositive log argument {self.value:.6g} at observation {self.cell[0]}, "
            f"dimension {self.cell[1]} (eta=0)"
        )


class InfeasibleShiftError(MCTMError, ValueError):
    """No nonnegative shift along the ramp direction lifts every log argument above eta."""


class DegenerateInputError(MCTMError, ValueError):
    """Input matrix carries no information (e.g. all zeros)."""


class FitDivergedError(MCTMError, RuntimeError):
    """The objective became non-finite; ``params`` holds the last finite iterate."""

    def __init__(self, message, params=None):
        super().__init__(message)
        self.params = params


class LineSearchStalled(MCTMError, RuntimeError):
    """Backtracking exhausted its halving budget without an acceptable step."""


class InvalidComparisonError(MCTMError, ValueError):
    """Two parameter sets have incompatible shapes."""


class DataLoadError(MCTMError, ValueError):
    """A CSV input could not be read into a numeric dataset."""
