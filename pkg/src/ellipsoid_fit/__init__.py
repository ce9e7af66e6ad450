"""Least-squares ellipsoid fitting with iterative frame alignment."""
from .errors import (
    ConstraintInfeasibleError,
    DegenerateQuadricError,
    EllipsoidFitError,
    FitFailedError,
    InvalidInputError,
    NotAnEllipsoidError,
    OrientationAmbiguousError,
)
from .fit import (
    EllipsoidGeometry,
    FitConfig,
    FitReport,
    IterationRecord,
    fit_ellipsoid,
    init_rotation,
    single_pass_fit,
)
from .lsq import SinglePassFit, fit_for_k, inner_fit
from .orientation import EulerAngles, euler_to_matrix, matrix_to_euler, recover_orientation
from .synth import SynthSpec, generate, sample_quadric

__version__ = "0.1.0"
