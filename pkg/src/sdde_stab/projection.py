"""Center-space coordinate, spectral projection and lift for 0 < a != 1.

The center space of v' = a[v(t) - v(t - 1)] is spanned by the constant
function 1.  The projection along the complementary invariant subspace uses
the adjoint pairing of the linear equation, which here reduces to

    z(phi) = [phi(0) - a * integral_{-1}^{0} phi] / (1 - a).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .integrator import Trajectory
from .segment import Segment


class DegenerateProjectionError(ValueError):
    """The center space is not one-dimensional (a = 1)."""


@dataclass(frozen=True)
class CenterBasis:
    a: float
    quad_order: int = 32

    def __post_init__(self):
        if abs(1.0 - self.a) < 1e-9:
            raise DegenerateProjectionError("a = 1: zero is a double root, no 1-D center projection")

    @property
    def B_c(self) -> np.ndarray:
        """Matrix of the generator on the center space (1x1 zero)."""
        return np.zeros((1, 1))

    def eta0(self, h: float = 1.0, n: int = 256) -> Segment:
        return Segment.constant(1.0, h, n)

    def integral(self, phi: Segment) -> float:
        """Gauss-Legendre quadrature of phi over [-h, 0], one panel per node interval."""
        x, w = leggauss(self.quad_order)
        theta = phi.theta
        lo, hi = theta[:-1, None], theta[1:, None]
        pts = 0.5 * (hi - lo) * x[None, :] + 0.5 * (hi + lo)
        # keep interior points inside [-h, 0] under rounding
        pts = np.clip(pts, -phi.h, 0.0)
        vals = phi.eval(pts)
        return float(np.sum(0.5 * (hi - lo) * w[None, :] * vals))


def center_coordinate(basis: CenterBasis, phi: Segment) -> float:
    return (float(phi.values[-1]) - basis.a * basis.integral(phi)) / (1.0 - basis.a)


def project_center(basis: CenterBasis, phi: Segment) -> Segment:
    return Segment.constant(center_coordinate(basis, phi), phi.h, phi.n)


def lift_center(basis: CenterBasis, z: float, h: float = 1.0, n: int = 256) -> Segment:
    """Phi_c z: the constant segment z (the center-manifold graph is not represented)."""
    return Segment.constant(z, h, n)


def center_curve(basis: CenterBasis, traj: Trajectory, times) -> np.ndarray:
    """z(t) = center_coordinate(x_t) along a trajectory, from the exact dense output."""
    times = np.asarray(times, dtype=float)
    return (np.asarray(traj.eval(times)) - basis.a * np.asarray(traj.window_integral(times))) / (1.0 - basis.a)
