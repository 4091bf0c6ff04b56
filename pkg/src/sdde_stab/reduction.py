"""Reduced dynamics on the one-dimensional center manifold.

The leading-order reduced field is h(z) = -|z| z / (1 - a).  This module
integrates it, recovers its coefficient from full-model trajectories by
regression, and classifies a scalar field with the Lyapunov function z^2/2.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from .integrator import Trajectory
from .projection import CenterBasis, center_curve
from .spectrum import real_root_kappa

STRICT_STABLE, STRICT_UNSTABLE, INDEFINITE = "STRICT_STABLE", "STRICT_UNSTABLE", "INDEFINITE"


class FitError(RuntimeError):
    pass


def analytic_coefficient(a: float) -> float:
    if abs(1.0 - a) < 1e-12:
        raise ValueError("a = 1 is degenerate")
    return 1.0 / (1.0 - a)


def analytic_reduced_field(a: float, z):
    return -analytic_coefficient(a) * np.abs(z) * z


@dataclass(frozen=True)
class ReducedCurve:
    t: np.ndarray
    z: np.ndarray
    escaped: bool = False


def integrate_reduced(a: float, z0: float, T: float, dt: float = 1e-2, coefficient: float | None = None,
                      escape: float = 10.0) -> ReducedCurve:
    """RK4 for z' = -c |z| z with c = 1/(1-a) unless ``coefficient`` is given.

    For c < 0 solutions blow up in finite time; the run stops once |z|
    reaches ``escape`` and is flagged.
    """
    c = analytic_coefficient(a) if coefficient is None else coefficient
    n = max(1, int(math.ceil(T / dt - 1e-9)))
    dt = T / n
    f = lambda z: -c * abs(z) * z  # noqa: E731
    ts = [0.0]
    zs = [float(z0)]
    z = float(z0)
    for i in range(n):
        k1 = f(z)
        k2 = f(z + 0.5 * dt * k1)
        k3 = f(z + 0.5 * dt * k2)
        k4 = f(z + dt * k3)
        z = z + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        ts.append((i + 1) * dt)
        zs.append(z)
        if abs(z) >= escape or not math.isfinite(z):
            return ReducedCurve(np.array(ts), np.array(zs), True)
    return ReducedCurve(np.array(ts), np.array(zs))


def closed_form_reduced(a: float, z0: float, t):
    """Exact solution z0 / (1 + c |z0| t) of the truncated reduced equation (a < 1)."""
    c = analytic_coefficient(a)
    return z0 / (1.0 + c * abs(z0) * np.asarray(t))


@dataclass(frozen=True)
class FitWindow:
    """Samples used by the regression.

    ``t_min=None`` drops the transient t < 5 / |kappa(a)|.  Amplitudes are
    restricted to z_lo <= |z| <= z_hi, where the o(|z|^2) remainder is small.
    """

    t_min: float | None = None
    t_max: float | None = None
    z_lo: float = 1e-4
    z_hi: float = 0.02
    stride: float = 0.05


@dataclass(frozen=True)
class ReducedField:
    a: float
    c_analytic: float
    c_fitted: float
    stderr: float
    n_samples: int
    window: dict
    residual_max: float

    def __call__(self, z):
        return -self.c_fitted * np.abs(z) * z

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def projected_samples(trajectories: Sequence[Trajectory], basis: CenterBasis, window: FitWindow):
    """Center coordinate z and its central-difference slope along each trajectory."""
    t_min = window.t_min
    if t_min is None:
        kappa = real_root_kappa(basis.a)
        t_min = 5.0 / abs(kappa)
    zs, dzs, ts = [], [], []
    for traj in trajectories:
        t_end = traj.end_time if window.t_max is None else min(window.t_max, traj.end_time)
        grid = np.arange(t_min, t_end + 1e-12, window.stride)
        if grid.size < 3:
            continue
        z = center_curve(basis, traj, grid)
        dz = (z[2:] - z[:-2]) / (grid[2:] - grid[:-2])
        zs.append(z[1:-1])
        dzs.append(dz)
        ts.append(grid[1:-1])
    if not zs:
        return np.zeros(0), np.zeros(0), np.zeros(0)
    return np.concatenate(ts), np.concatenate(zs), np.concatenate(dzs)


def fit_reduced_field(trajectories: Sequence[Trajectory], basis: CenterBasis,
                      window: FitWindow | None = None, min_samples: int = 50) -> ReducedField:
    """Least-squares fit of z' = -c |z| z through the origin."""
    window = window or FitWindow()
    t, z, dz = projected_samples(trajectories, basis, window)
    if z.size == 0:
        raise FitError("no samples after the transient cut")
    sel = (np.abs(z) >= window.z_lo) & (np.abs(z) <= window.z_hi)
    if not sel.any():
        raise FitError("amplitude window is empty after the transient cut")
    if sel.sum() < min_samples:
        raise FitError(f"only {int(sel.sum())} usable samples (need {min_samples})")
    z, dz = z[sel], dz[sel]
    q = -np.abs(z) * z
    qq = float(np.dot(q, q))
    c = float(np.dot(q, dz)) / qq
    res = dz - c * q
    n = z.size
    stderr = math.sqrt(float(np.dot(res, res)) / (n - 1) / qq)
    win = asdict(window)
    if win["t_min"] is None:
        win["t_min"] = 5.0 / abs(real_root_kappa(basis.a))
    return ReducedField(basis.a, analytic_coefficient(basis.a), c, stderr, int(n), win,
                        float(np.max(np.abs(res) / z ** 2)))


def lyapunov_check(field: Callable, interval: tuple[float, float], points: int = 10_000) -> str:
    """Sign of the orbital derivative of V(z) = z^2/2 on z_lo <= |z| <= z_hi."""
    z_lo, z_hi = interval
    if not 0 < z_lo < z_hi:
        raise ValueError("need 0 < z_lo < z_hi")
    mag = np.linspace(z_lo, z_hi, points // 2)
    z = np.concatenate([-mag[::-1], mag])
    dv = z * np.asarray(field(z), dtype=float)
    if np.all(dv < 0):
        return STRICT_STABLE
    if np.all(dv > 0):
        return STRICT_UNSTABLE
    return INDEFINITE
