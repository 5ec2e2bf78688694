"""Exception taxonomy shared across the package.

Every error that maps onto a CLI failure mode derives from MaxsurfError;
the CLI translates UsageError into exit code 2 and everything else into
exit code 3 with a machine-readable JSON payload.
"""


class MaxsurfError(Exception):
    """Base class for all package errors."""

    kind = "numerical"


class UsageError(MaxsurfError):
    """Malformed configuration or command line."""

    kind = "usage"


class InvalidBoostError(MaxsurfError):
    """Boost speed outside (-1, 1) or degenerate direction."""


class DomainError(MaxsurfError):
    """Argument outside the mathematical domain of an operation."""


class GridConstructionError(MaxsurfError):
    """Invalid annulus geometry; message names the offending parameter."""


class OutOfDomainError(MaxsurfError):
    """Interpolation or contour query outside the grid."""


class NonSpacelikeError(MaxsurfError):
    """A field or iterate violates the spacelike gradient bound."""


class AdmissibilityError(MaxsurfError):
    """Boundary data admits no spacelike extension at sample resolution."""


class ConvergenceError(MaxsurfError):
    """Newton or continuation failure; carries diagnostic history."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class LinearSolveError(MaxsurfError):
    """Inner CG solve failed to reach tolerance."""


class RootFindError(MaxsurfError):
    """Monotone 1-D inversion failed (treated as a bug, not an input error)."""


class FitError(MaxsurfError):
    """Asymptotic fit failed (|a|>=1 or ill-conditioned window)."""
