"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition or type invariant."""


class NotPSDError(Exception):
    """Cholesky factorization hit a pivot below the allowed tolerance."""

    def __init__(self, pivot: int, value: float):
        super().__init__(
            f"matrix is not positive semidefinite (pivot {pivot} = {value:.3e})"
        )
        self.pivot = pivot
        self.value = value


class InfeasibleTiming(Exception):
    """A phase time is undefined: positive workload over a zero denominator."""


class InfeasibleSubproblem(Exception):
    """A subproblem has an empty feasible set."""

    def __init__(self, message: str, user: int | None = None, constraint: str | None = None):
        super().__init__(message)
        self.user = user
        self.constraint = constraint


class ScenarioInfeasible(Exception):
    """No feasible starting point exists for the scenario."""


class StartInfeasible(Exception):
    """The barrier solver was handed a point that is not strictly feasible."""


class NumericalFailure(Exception):
    """Newton iterations broke down; carries the best iterate found."""

    def __init__(self, message: str, point=None, report=None):
        super().__init__(message)
        self.point = point
        self.report = report


class ScenarioFileError(ValidationError):
    """A scenario file failed to parse or validate; names the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
