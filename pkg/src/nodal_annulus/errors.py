"""Exception hierarchy shared by the solvers."""


class SolverError(RuntimeError):
    """Base class for numerical failures (as opposed to invalid input)."""


class BlowUpError(SolverError):
    """Non-finite values appeared while integrating the radial ODE."""

    def __init__(self, radius, message=None):
        self.radius = radius
        super().__init__(message or f"blow-up: integration failed after r = {radius:.17g}")


class BracketError(SolverError):
    """No shooting bracket was found in the configured parameter range."""


class ConvergenceError(SolverError):
    """An iteration did not reach its tolerance."""


class InvalidPlacementError(SolverError):
    """Zero placements left the ordered simplex a < r_1 < ... < r_{m-1} < b."""


class ClusteredSpectrumError(SolverError):
    """Bisection could not separate two eigenvalues at working precision."""


class InconsistentSpectrumError(SolverError):
    """A spectrum slice does not have the expected negative eigenvalues."""


class FoldError(SolverError):
    """The deformation x -> x + t sigma(x) is not a local diffeomorphism."""


class DegenerateExponentError(SolverError):
    """The Newton matrix is numerically singular."""


class DegenerateLinearizationError(SolverError):
    """An exactly zero pivot was met while computing an inertia."""
