"""Exception types shared across the package."""


class TaskQPError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(TaskQPError, ValueError):
    """Operand shapes are incompatible."""


class EmptyProblemError(TaskQPError, ValueError):
    """The problem has no decision variables."""


class InfeasibleError(TaskQPError):
    """The hard constraint set admits no solution.

    ``row`` is the index of a certificate row, ``kind`` is "equality" or
    "inequality" and ``label`` carries the user-facing name when known.
    """

    def __init__(self, message, row=None, kind=None, label=None):
        super().__init__(message)
        self.row = row
        self.kind = kind
        self.label = label


class NonconvergenceError(TaskQPError):
    """The solver hit its iteration cap before reaching optimality."""


class NotPositiveDefiniteError(TaskQPError):
    """The cost Hessian is not positive definite, even after the retry bump."""


class RankDeficiencyError(TaskQPError):
    """An equality block expected to have full row rank does not.

    ``row`` names the first dependent row.
    """

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class ModelError(TaskQPError, ValueError):
    """A robot description (URDF subset or collision sidecar) is invalid."""


class UnknownNameError(TaskQPError, ValueError):
    """A frame, link or joint name does not resolve against the model."""


class ScenarioError(TaskQPError, ValueError):
    """A scenario file failed validation."""
