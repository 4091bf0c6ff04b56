"""Stability decision pipeline for the zero equilibrium.

Order of the branches: an eigenvalue with positive real part gives
instability; a spectrum strictly in the left half-plane gives asymptotic
stability; otherwise the decision is made on the reduced equation on the
center manifold.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, newton

from .integrator import BLOWUP_STOPPED, IntegrationOptions, integrate, segment_at
from .model import LinearDelayModel, Model, make_admissible
from .projection import CenterBasis, center_coordinate, center_curve
from .reduction import (INDEFINITE, STRICT_STABLE, STRICT_UNSTABLE, FitError, FitWindow, ReducedField,
                        analytic_reduced_field, fit_reduced_field, lyapunov_check)
from .segment import Segment, norm_c1
from .spectrum import Rect, SpectrumSplit, find_roots

UNSTABLE_LINEAR = "UNSTABLE_LINEAR"
ASYMPTOTICALLY_STABLE_LINEAR = "ASYMPTOTICALLY_STABLE_LINEAR"
UNSTABLE_REDUCED = "UNSTABLE_REDUCED"
ASYMPTOTICALLY_STABLE_REDUCED = "ASYMPTOTICALLY_STABLE_REDUCED"
STABLE_REDUCED = "STABLE_REDUCED"
INCONCLUSIVE = "INCONCLUSIVE"

THEOREM_LINEAR_UNSTABLE = "linearized instability (unstable eigenvalue)"
THEOREM_LINEAR_STABLE = "linearized stability (spectrum in open left half-plane)"
THEOREM_REDUCTION = "reduction principle (center manifold)"

_FROM_LYAPUNOV = {STRICT_STABLE: ASYMPTOTICALLY_STABLE_REDUCED, STRICT_UNSTABLE: UNSTABLE_REDUCED,
                  INDEFINITE: INCONCLUSIVE}


class AttractionError(RuntimeError):
    pass


def default_window(coeffs: tuple[float, float]) -> Rect:
    """Search window that contains every root with Re >= 0.

    Such roots satisfy |lambda - A| <= |B|, so Re(lambda) <= A + |B|.
    """
    A, B = coeffs
    return Rect(-5.0, max(2.0, A + abs(B) + 1.0), 40.0)


@dataclass(frozen=True)
class ClassifyOptions:
    window: Rect | None = None
    center_tol: float = 1e-9
    eps: tuple[float, ...] = (0.05, 0.1, 0.15)
    T: float = 100.0
    fit_window: FitWindow = field(default_factory=FitWindow)
    integration: IntegrationOptions = field(default_factory=IntegrationOptions)


@dataclass(frozen=True)
class StabilityVerdict:
    verdict: str
    theorem: str
    spectrum: SpectrumSplit
    a: float | None = None
    reduced: ReducedField | None = None
    lyapunov: str | None = None
    lyapunov_analytic: str | None = None
    note: str = ""

    def to_dict(self) -> dict:
        def roots(rs):
            return [{"re": r.re, "im": r.im, "multiplicity": r.multiplicity} for r in rs]

        reduced = None
        if self.reduced is not None:
            reduced = json.loads(self.reduced.to_json())
            reduced["lyapunov"] = self.lyapunov
            reduced["lyapunov_analytic"] = self.lyapunov_analytic
        return {"a": self.a, "verdict": self.verdict, "theorem": self.theorem,
                "sigma_u": roots(self.spectrum.sigma_u), "sigma_c": roots(self.spectrum.sigma_c),
                "rightmost_stable_re": self.spectrum.rightmost_stable_re, "reduced": reduced,
                "note": self.note}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def classify(model: Model | LinearDelayModel, opts: ClassifyOptions | None = None) -> StabilityVerdict:
    opts = opts or ClassifyOptions()
    coeffs = model.linear_coeffs
    window = opts.window or default_window(coeffs)
    split = find_roots(window, coeffs=coeffs, center_tol=opts.center_tol)
    a = getattr(model, "a", None)
    if split.sigma_u:
        return StabilityVerdict(UNSTABLE_LINEAR, THEOREM_LINEAR_UNSTABLE, split, a)
    if not split.sigma_c:
        return StabilityVerdict(ASYMPTOTICALLY_STABLE_LINEAR, THEOREM_LINEAR_STABLE, split, a)

    if not isinstance(model, Model):
        return StabilityVerdict(INCONCLUSIVE, THEOREM_REDUCTION, split, a,
                                note="critical spectrum without a nonlinear model to reduce")
    if sum(r.multiplicity for r in split.sigma_c) != 1:
        return StabilityVerdict(INCONCLUSIVE, THEOREM_REDUCTION, split, a,
                                note="center space is not one-dimensional")
    basis = CenterBasis(model.a)
    trajs = [integrate(model, make_admissible(model, e), opts.T, opts.integration) for e in opts.eps]
    try:
        field_fit = fit_reduced_field(trajs, basis, opts.fit_window)
    except FitError as exc:
        return StabilityVerdict(INCONCLUSIVE, THEOREM_REDUCTION, split, a, note=f"fit failed: {exc}")
    interval = (opts.fit_window.z_lo, opts.fit_window.z_hi)
    lyap = lyapunov_check(field_fit, interval)
    lyap_analytic = lyapunov_check(lambda z: analytic_reduced_field(model.a, z), interval)
    return StabilityVerdict(_FROM_LYAPUNOV[lyap], THEOREM_REDUCTION, split, a, field_fit, lyap, lyap_analytic)


# ---------------------------------------------------------------- attraction


@dataclass(frozen=True)
class AttractionReport:
    rate: float
    slope: float
    r_squared: float
    shadow_eps: float
    times: np.ndarray
    distances: np.ndarray

    @property
    def trivial(self) -> bool:
        return math.isinf(self.rate)


def _affine_shadow(model: Model, e: float) -> Segment:
    return make_admissible(model, e)


def _match_center(model: Model, basis: CenterBasis, z: float) -> float:
    if z == 0.0:
        return 0.0
    fn = lambda e: center_coordinate(basis, _affine_shadow(model, e)) - z  # noqa: E731
    lo, hi = -2 * abs(z) - 0.1, 2 * abs(z) + 0.1
    return brentq(fn, lo, hi, xtol=1e-15)


def verify_attraction(model: Model, phi: Segment, T: float = 20.0, samples: int = 61,
                      floor: float = 1e-13, max_norm: float = 0.3,
                      opts: IntegrationOptions | None = None) -> AttractionReport:
    """Measure the exponential rate at which x_t^phi approaches a shadow on the center manifold.

    The shadow starts from an affine admissible segment.  Its phi(0) is first
    chosen so that its center coordinate equals that of ``phi`` and then
    adjusted by a secant iteration until both center coordinates agree at
    time T, so the two solutions share their asymptotic phase.  The slope of
    log ||x_t^phi - x_t^shadow||_{C^1} over [T/4, T] estimates the rate.
    """
    opts = opts or IntegrationOptions()
    split = find_roots(default_window(model.linear_coeffs), coeffs=model.linear_coeffs)
    if split.sigma_u:
        raise AttractionError("unstable spectrum: attraction to the center manifold is not expected")
    if norm_c1(phi) > max_norm:
        raise AttractionError(f"initial segment too large (C^1 norm {norm_c1(phi):.3g} > {max_norm})")
    basis = CenterBasis(model.a)
    main = integrate(model, phi, T, opts)
    if main.status == BLOWUP_STOPPED or main.end_time < T:
        raise AttractionError("solution left the neighborhood before T")
    z_end = float(center_curve(basis, main, [T])[0])
    e0 = _match_center(model, basis, center_coordinate(basis, phi))

    def mismatch(e):
        shadow = integrate(model, _affine_shadow(model, e), T, opts)
        return float(center_curve(basis, shadow, [T])[0]) - z_end

    if e0 != 0.0 and abs(mismatch(e0)) > 1e-15:
        # stagnation at rounding level counts as convergence
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            e0 = float(newton(mismatch, e0, x1=e0 * (1 + 1e-3), tol=1e-16, maxiter=50, disp=False))
    shadow = integrate(model, _affine_shadow(model, e0), T, opts)

    times = np.linspace(T / 4, T, samples)
    dist = np.array([norm_c1(segment_at(main, t) - segment_at(shadow, t)) for t in times])
    if dist[0] < floor:
        return AttractionReport(math.inf, -math.inf, 1.0, e0, times, dist)
    keep = dist > floor
    tt, y = times[keep], np.log(dist[keep])
    slope, icpt = np.polyfit(tt, y, 1)
    resid = y - (slope * tt + icpt)
    r2 = 1.0 - float(np.sum(resid ** 2)) / float(np.sum((y - y.mean()) ** 2))
    return AttractionReport(-float(slope), float(slope), r2, e0, times, dist)


# ---------------------------------------------------------------- decay diagnostics


@dataclass(frozen=True)
class DecayReport:
    t_mean_x: float
    log_fit_slope: float
    log_fit_r_squared: float


def log_linear_fit(t, y) -> tuple[float, float, float]:
    """Least-squares line through (t, log y); returns slope, intercept, R^2."""
    t = np.asarray(t, dtype=float)
    ly = np.log(np.abs(np.asarray(y, dtype=float)))
    slope, icpt = np.polyfit(t, ly, 1)
    resid = ly - (slope * t + icpt)
    r2 = 1.0 - float(np.sum(resid ** 2)) / float(np.sum((ly - ly.mean()) ** 2))
    return float(slope), float(icpt), r2


def decay_report(traj, t0: float, t1: float, samples: int = 1001) -> DecayReport:
    """Mean of t x(t) and the quality of an exponential fit over [t0, t1]."""
    t = np.linspace(t0, t1, samples)
    x = np.asarray(traj.eval(t))
    slope, _, r2 = log_linear_fit(t, x)
    return DecayReport(float(np.mean(t * x)), slope, r2)


def growth_rate(traj, lo: float = 1e-4, hi: float = 1e-2, stride: float = 0.01) -> tuple[float, float]:
    """Exponential growth rate of |x| on its first passage from lo to hi; returns (rate, R^2)."""
    t = np.arange(0.0, traj.end_time, stride)
    x = np.abs(np.asarray(traj.eval(t)))
    above = np.nonzero(x > hi)[0]
    stop = above[0] if above.size else x.size
    sel = (x >= lo) & (x <= hi) & (np.arange(x.size) < stop)
    if sel.sum() < 3:
        raise FitError("too few samples in the linear regime")
    slope, _, r2 = log_linear_fit(t[sel], x[sel])
    return slope, r2


def first_exceedance(traj, level: float, stride: float = 0.01) -> float | None:
    t = np.arange(0.0, traj.end_time + 1e-12, stride)
    x = np.abs(np.asarray(traj.eval(np.minimum(t, traj.end_time))))
    idx = np.nonzero(x > level)[0]
    return float(t[idx[0]]) if idx.size else None
