"""Forward integration of the model and of its linearization.

Fixed-step classical RK4 with a cubic Hermite continuous extension.  The
history is the initial segment on [-h, 0] followed by knots t_k = k dt on
[0, T]; every knot stores the value and the right-hand side there, so the
dense output is C^1 across knots.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import Model, admissibility_residual
from .segment import DomainError, Segment, hermite_derivative, hermite_integral, hermite_value

COMPLETED, BLOWUP_STOPPED, STEP_FAILURE = "completed", "blowup_stopped", "step_failure"
_STATUS = {0: COMPLETED, 1: BLOWUP_STOPPED, 2: STEP_FAILURE}


class AdmissibilityError(ValueError):
    """The initial segment is not on the solution manifold."""


@dataclass(frozen=True, eq=False)
class IntegrationOptions:
    dt: float = 1e-3
    bound: float = 5.0
    admissibility_tol: float = 1e-8
    residual_tol: float = 1e-6
    max_halvings: int = 2
    check_points: int = 64


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Dense solution on [-h, end_time].

    ``model`` is set for runs of the nonlinear model; linear runs carry the
    coefficients (A, B) of v' = A v(t) + B v(t - h) instead.
    """

    initial: Segment
    dt: float
    xs: np.ndarray
    xps: np.ndarray
    status: str
    model: Model | None = None
    coeffs: tuple[float, float] | None = None
    max_sweeps: int = 1

    def __post_init__(self):
        for name in ("xs", "xps"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        # cumulative integral of the dense output from 0 to each knot
        y, m, dt = self.xs, self.xps, self.dt
        pieces = dt * (y[:-1] + y[1:]) / 2 + dt * dt * (m[:-1] - m[1:]) / 12
        cum = np.concatenate([[0.0], np.cumsum(pieces)])
        cum.flags.writeable = False
        object.__setattr__(self, "_cum", cum)

    @property
    def h(self) -> float:
        return self.initial.h

    @property
    def end_time(self) -> float:
        return (self.xs.size - 1) * self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.xs.size) * self.dt

    def _split(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < -self.h) or np.any(t > self.end_time * (1 + 1e-14) + 1e-300) or np.any(np.isnan(t)):
            raise DomainError(f"time outside [-{self.h}, {self.end_time}]")
        past = t <= 0.0
        k = np.clip(np.floor(t / self.dt).astype(int), 0, max(self.xs.size - 2, 0))
        u = np.clip(t / self.dt - k, 0.0, 1.0)
        return t, past, k, u

    def _dense(self, t, seg_fn, rule):
        t, past, k, u = self._split(t)
        if self.xs.size < 2:
            out = np.where(past, seg_fn(np.minimum(t, 0.0)), self.xs[0] if rule is hermite_value else self.xps[0])
        else:
            fut = rule(u, self.dt, self.xs[k], self.xs[k + 1], self.xps[k], self.xps[k + 1])
            out = np.where(past, seg_fn(np.minimum(t, 0.0)), fut)
        return out if out.ndim else float(out)

    def eval(self, t):
        """x(t); on [-h, 0] this is the initial segment."""
        return self._dense(t, self.initial.eval, hermite_value)

    def eval_derivative(self, t):
        """x'(t); at t = 0 the initial segment's (left) derivative is returned."""
        return self._dense(t, self.initial.eval_derivative, hermite_derivative)

    def integral_from_zero(self, t):
        """Integral of x over [0, t] for t >= 0, exact for the dense output."""
        t, past, k, u = self._split(t)
        part = hermite_integral(u, self.dt, self.xs[k], self.xs[np.minimum(k + 1, self.xs.size - 1)],
                                self.xps[k], self.xps[np.minimum(k + 1, self.xs.size - 1)])
        out = np.where(past, 0.0, self._cum[k] + part)
        return out if out.ndim else float(out)

    def window_integral(self, t):
        """Integral of x over [t - h, t] for 0 <= t <= end_time."""
        t = np.asarray(t, dtype=float)
        lo = t - self.h
        # history part, where the window reaches back before 0
        seg = self.initial
        y, m, dx = seg.values, seg.derivatives, seg.spacing
        pieces = dx * (y[:-1] + y[1:]) / 2 + dx * dx * (m[:-1] - m[1:]) / 12
        seg_cum = np.concatenate([[0.0], np.cumsum(pieces)])
        total_seg = seg_cum[-1]
        lo_c = np.clip(lo, -seg.h, 0.0)
        q = (lo_c + seg.h) / dx
        k = np.clip(np.floor(q).astype(int), 0, seg.n - 2)
        upto_lo = seg_cum[k] + hermite_integral(q - k, dx, y[k], y[k + 1], m[k], m[k + 1])
        hist_part = np.where(lo < 0.0, total_seg - upto_lo, 0.0)
        new_part = self.integral_from_zero(t) - np.where(lo > 0.0, self.integral_from_zero(np.maximum(lo, 0.0)), 0.0)
        out = hist_part + new_part
        return out if out.ndim else float(out)

    def rhs(self, t) -> float:
        """Right-hand side evaluated on the dense history at time t >= 0."""
        x = float(self.eval(t))
        if self.model is None:
            A, B = self.coeffs
            return A * x + B * float(self.eval(t - self.h))
        r = float(self.model.delay(x))
        return self.model.a * (x - float(self.eval(t - r))) - abs(x) * x

    def to_csv(self, stride: float = 1e-2) -> str:
        n = int(math.floor((self.end_time + self.h) / stride + 1e-9))
        ts = -self.h + stride * np.arange(n + 1)
        ts = ts[ts <= self.end_time]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "xprime"])
        for t, x, xp in zip(ts, self.eval(ts), self.eval_derivative(ts)):
            w.writerow([f"{t:.17g}", f"{x:.17g}", f"{xp:.17g}"])
        return buf.getvalue()


def segment_at(traj: Trajectory, t: float, n: int | None = None) -> Segment:
    """The history segment x_t(theta) = x(t + theta) sampled from the dense output."""
    if not 0.0 <= t <= traj.end_time:
        raise DomainError(f"t={t} outside [0, {traj.end_time}]")
    n = traj.initial.n if n is None else n
    if t == 0.0 and n == traj.initial.n:
        return traj.initial
    s = t + np.linspace(-traj.h, 0.0, n)
    s = np.clip(s, -traj.h, traj.end_time)
    return Segment(traj.h, traj.eval(s), traj.eval_derivative(s))


def residual(traj: Trajectory, t: float) -> float:
    """Defect |x'(t) - f(x_t)| of the dense solution at time t."""
    if not 0.0 <= t <= traj.end_time:
        raise DomainError(f"t={t} outside [0, {traj.end_time}]")
    return abs(float(traj.eval_derivative(t)) - traj.rhs(t))


def max_residual(traj: Trajectory, times) -> float:
    return max((residual(traj, float(t)) for t in times), default=0.0)


def _spot_times(end_time: float, dt: float, count: int) -> np.ndarray:
    steps = int(round(end_time / dt))
    if steps < 1:
        return np.zeros(0)
    ks = np.unique(np.linspace(0, steps - 1, min(count, steps)).astype(int))
    return (ks + 0.5) * dt


def _run(mode, initial: Segment, T: float, dt: float, bound: float, model=None, coeffs=(0.0, 0.0)):
    if not T > 0:
        raise ValueError("T must be positive")
    n_steps = max(1, int(math.ceil(T / dt - 1e-9)))
    dt_eff = T / n_steps
    xs = np.zeros(n_steps + 1)
    xps = np.zeros(n_steps + 1)
    xs[0] = initial.values[-1]
    if model is not None:
        d = model.delay
        kind = kernels.KIND_CODES[d.kind]
        tab = (d.table_s, d.table_r, d.table_dr) if d.kind == "user_table" else (None, None, None)
        args = (mode, 0.0, 0.0, model.a, kind, d.r0, d.c, *tab)
    else:
        args = (mode, coeffs[0], coeffs[1], 0.0, 0, 1.0, 1.0, None, None, None)
    done, status, sweeps = kernels.integrate_rk4(*args, initial.h, initial.values, initial.derivatives,
                                                 dt_eff, n_steps, bound, xs, xps)
    return Trajectory(initial, dt_eff, xs[:done + 1], xps[:done + 1], _STATUS[status], model=model,
                      coeffs=None if model is not None else tuple(coeffs), max_sweeps=sweeps)


def integrate(model: Model, phi0: Segment, T: float, opts: IntegrationOptions | None = None) -> Trajectory:
    """Solve x'(t) = f(x_t) from phi0 on [0, T].

    The run stops early with status ``blowup_stopped`` once |x(t)| reaches
    ``opts.bound``.  A completed run whose residual spot checks exceed
    ``opts.residual_tol`` is repeated with a halved step, at most
    ``opts.max_halvings`` times, and otherwise reported as ``step_failure``.
    """
    opts = opts or IntegrationOptions()
    if abs(phi0.h - model.h) > 1e-14:
        raise ValueError("segment horizon does not match the model")
    adm = admissibility_residual(model, phi0)
    if adm > opts.admissibility_tol:
        raise AdmissibilityError(f"|phi'(0) - f(phi)| = {adm:.3g} exceeds {opts.admissibility_tol:g}")
    dt = opts.dt
    for attempt in range(opts.max_halvings + 1):
        traj = _run(kernels.MODE_MODEL, phi0, T, dt, opts.bound, model=model)
        if traj.status != COMPLETED:
            return traj
        spots = _spot_times(traj.end_time, traj.dt, opts.check_points)
        if max_residual(traj, spots) <= opts.residual_tol:
            return traj
        dt /= 2
    return Trajectory(traj.initial, traj.dt, traj.xs, traj.xps, STEP_FAILURE, model=model,
                      max_sweeps=traj.max_sweeps)


def integrate_linear(a: float, psi0: Segment, T: float, dt: float = 1e-3,
                     coeffs: tuple[float, float] | None = None) -> Trajectory:
    """Solve the linearization v'(t) = a[v(t) - v(t - 1)] from any continuous psi0.

    ``coeffs=(A, B)`` selects v' = A v(t) + B v(t - h) instead.  The slope
    may jump at t = 0.
    """
    coeffs = (a, -a) if coeffs is None else coeffs
    return _run(kernels.MODE_LINEAR, psi0, T, dt, math.inf, coeffs=coeffs)
