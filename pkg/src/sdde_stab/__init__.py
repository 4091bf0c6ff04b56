"""Local stability of the zero equilibrium of scalar state-dependent-delay equations."""
from .classifier import (ASYMPTOTICALLY_STABLE_LINEAR, ASYMPTOTICALLY_STABLE_REDUCED, INCONCLUSIVE,
                         STABLE_REDUCED, UNSTABLE_LINEAR, UNSTABLE_REDUCED, ClassifyOptions, StabilityVerdict,
                         classify, verify_attraction)
from .integrator import Trajectory, integrate, integrate_linear, residual, segment_at
from .kernels import BACKEND
from .model import DelayFunction, LinearDelayModel, Model, make_admissible, validate_delay
from .projection import CenterBasis, center_coordinate, lift_center, project_center
from .reduction import analytic_reduced_field, fit_reduced_field, integrate_reduced, lyapunov_check
from .segment import Segment, norm_c, norm_c1
from .spectrum import Rect, count_roots, find_roots, real_root_kappa

__version__ = "0.1.0"

__all__ = [
    "ASYMPTOTICALLY_STABLE_LINEAR", "ASYMPTOTICALLY_STABLE_REDUCED", "BACKEND", "CenterBasis", "ClassifyOptions",
    "DelayFunction", "INCONCLUSIVE", "LinearDelayModel", "Model", "Rect", "STABLE_REDUCED", "Segment",
    "StabilityVerdict", "Trajectory", "UNSTABLE_LINEAR", "UNSTABLE_REDUCED", "analytic_reduced_field",
    "center_coordinate", "classify", "count_roots", "find_roots", "fit_reduced_field", "integrate",
    "integrate_linear", "integrate_reduced", "lift_center", "lyapunov_check", "make_admissible", "norm_c",
    "norm_c1", "project_center", "real_root_kappa", "residual", "segment_at", "validate_delay",
    "verify_attraction",
]
