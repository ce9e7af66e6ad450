"""Exception hierarchy shared by the fitting pipeline."""


class EllipsoidFitError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(EllipsoidFitError, ValueError):
    """Malformed arguments: wrong shapes, non-finite values, too few points."""


class DegenerateQuadricError(EllipsoidFitError):
    """The quadratic part of a quadric is singular, so no center exists."""


class NotAnEllipsoidError(EllipsoidFitError):
    """A quadric that cannot be normalized to an ellipsoid."""


class ConstraintInfeasibleError(EllipsoidFitError):
    """No generalized eigenvector satisfies v^T C v > 0 for the current k."""


class FitFailedError(EllipsoidFitError):
    """The iterative fitter never produced an ellipsoid.

    ``diagnostics`` carries whatever per-iteration information was gathered.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class OrientationAmbiguousError(EllipsoidFitError):
    """None of the axis relabelings passed the reprojection check."""

    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = list(candidates)
