"""Exception and warning types shared across the package."""


class SolverError(Exception):
    """Base class for steady-state solver failures."""


class DegenerateSteadyState(SolverError):
    """The generator has more than one steady state within tolerance."""


class NoSteadyState(SolverError):
    """The candidate steady state does not satisfy the fixed-point equation."""


class SingularOnSubspace(SolverError):
    """The generator restricted to traceless matrices is rank deficient."""


class NonTracelessRHS(SolverError):
    """A traceless-subspace solve was handed a right side with nonzero trace."""


class NotConverged(SolverError):
    """Time evolution hit its time limit before reaching the residual target."""

    def __init__(self, message: str, residual: float | None = None,
                 t_final: float | None = None):
        super().__init__(message)
        self.residual = residual
        self.t_final = t_final


class ScenarioError(Exception):
    """A scenario file is malformed; ``field`` points at the offending entry."""

    def __init__(self, message: str, field: str | None = None):
        if field:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field


class OutsideConvergenceWarning(UserWarning):
    """Coupling strength outside the geometric-series convergence region."""


class TemperatureOrderingWarning(UserWarning):
    """Refrigerator built with bath temperatures not in increasing order."""
