"""History segments on [-h, 0] stored as cubic Hermite data.

A :class:`Segment` holds node values and node derivatives on a uniform grid
and evaluates the C^1 piecewise cubic Hermite interpolant between them.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

DEFAULT_NODES = 256


class DomainError(ValueError):
    """Raised when a segment or trajectory is queried outside its domain."""


def hermite_value(u, dx, y0, y1, m0, m1):
    """Cubic Hermite value at local coordinate ``u`` in [0, 1]."""
    u2 = u * u
    u3 = u2 * u
    h00 = 2 * u3 - 3 * u2 + 1
    h10 = u3 - 2 * u2 + u
    h01 = -2 * u3 + 3 * u2
    h11 = u3 - u2
    return h00 * y0 + h10 * dx * m0 + h01 * y1 + h11 * dx * m1


def hermite_derivative(u, dx, y0, y1, m0, m1):
    u2 = u * u
    d00 = 6 * u2 - 6 * u
    d10 = 3 * u2 - 4 * u + 1
    d01 = -6 * u2 + 6 * u
    d11 = 3 * u2 - 2 * u
    return (d00 * y0 + d01 * y1) / dx + d10 * m0 + d11 * m1


def hermite_integral(u, dx, y0, y1, m0, m1):
    """Integral of the Hermite cubic from the left knot to local coordinate ``u``."""
    u2 = u * u
    u3 = u2 * u
    u4 = u3 * u
    i00 = u4 / 2 - u3 + u
    i10 = u4 / 4 - 2 * u3 / 3 + u2 / 2
    i01 = -u4 / 2 + u3
    i11 = u4 / 4 - u3 / 3
    return dx * (i00 * y0 + i10 * dx * m0 + i01 * y1 + i11 * dx * m1)


@dataclass(frozen=True, eq=False)
class Segment:
    """A C^1 function on [-h, 0] given by Hermite data on a uniform grid."""

    h: float
    values: np.ndarray
    derivatives: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        derivs = np.array(self.derivatives, dtype=float)
        if self.h <= 0:
            raise ValueError("horizon h must be positive")
        if values.ndim != 1 or values.shape != derivs.shape or values.size < 2:
            raise ValueError("values and derivatives must be 1-D arrays of equal length >= 2")
        values.flags.writeable = False
        derivs.flags.writeable = False
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "derivatives", derivs)

    @classmethod
    def from_function(
        cls,
        func: Callable,
        deriv: Callable,
        h: float = 1.0,
        n: int = DEFAULT_NODES,
    ) -> "Segment":
        theta = np.linspace(-h, 0.0, n)
        return cls(h, np.broadcast_to(func(theta), theta.shape), np.broadcast_to(deriv(theta), theta.shape))

    @classmethod
    def constant(cls, c: float, h: float = 1.0, n: int = DEFAULT_NODES) -> "Segment":
        return cls(h, np.full(n, float(c)), np.zeros(n))

    @classmethod
    def zero(cls, h: float = 1.0, n: int = DEFAULT_NODES) -> "Segment":
        return cls.constant(0.0, h, n)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def spacing(self) -> float:
        return self.h / (self.n - 1)

    @property
    def theta(self) -> np.ndarray:
        return np.linspace(-self.h, 0.0, self.n)

    def _locate(self, theta):
        theta = np.asarray(theta, dtype=float)
        if np.any(theta < -self.h) or np.any(theta > 0.0) or np.any(np.isnan(theta)):
            raise DomainError(f"theta outside [-{self.h}, 0]")
        dx = self.spacing
        s = (theta + self.h) / dx
        k = np.clip(np.floor(s).astype(int), 0, self.n - 2)
        return theta, k, s - k, dx

    def eval(self, theta):
        """Value of the interpolant; exact at nodes."""
        theta, k, u, dx = self._locate(theta)
        out = hermite_value(u, dx, self.values[k], self.values[k + 1],
                            self.derivatives[k], self.derivatives[k + 1])
        return out if out.ndim else float(out)

    def eval_derivative(self, theta):
        theta, k, u, dx = self._locate(theta)
        out = hermite_derivative(u, dx, self.values[k], self.values[k + 1],
                                 self.derivatives[k], self.derivatives[k + 1])
        return out if out.ndim else float(out)

    def __call__(self, theta):
        return self.eval(theta)

    def integral(self) -> float:
        """Exact integral of the interpolant over [-h, 0]."""
        y, m, dx = self.values, self.derivatives, self.spacing
        return float(np.sum(dx * (y[:-1] + y[1:]) / 2 + dx * dx * (m[:-1] - m[1:]) / 12))

    def __add__(self, other: "Segment") -> "Segment":
        _check_compatible(self, other)
        return Segment(self.h, self.values + other.values, self.derivatives + other.derivatives)

    def __sub__(self, other: "Segment") -> "Segment":
        _check_compatible(self, other)
        return Segment(self.h, self.values - other.values, self.derivatives - other.derivatives)

    def __mul__(self, alpha: float) -> "Segment":
        return Segment(self.h, alpha * self.values, alpha * self.derivatives)

    __rmul__ = __mul__

    def __neg__(self) -> "Segment":
        return self * -1.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["theta", "value", "derivative"])
        for row in zip(self.theta, self.values, self.derivatives):
            writer.writerow([f"{v:.17g}" for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Segment":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["theta", "value", "derivative"]:
            raise ValueError("segment CSV needs header theta,value,derivative")
        data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
        theta = data[:, 0]
        h = -theta[0]
        if abs(theta[-1]) > 1e-12 or np.any(np.diff(theta) <= 0):
            raise ValueError("theta grid must increase strictly and end at 0")
        if not np.allclose(theta, np.linspace(-h, 0.0, theta.size), rtol=0, atol=1e-12 * max(1.0, h)):
            raise ValueError("theta grid must be uniform")
        return cls(h, data[:, 1], data[:, 2])


def _check_compatible(a: Segment, b: Segment) -> None:
    if a.h != b.h or a.n != b.n:
        raise ValueError("segments live on different grids")


def _sup_abs(seg: Segment, value_fn, node_samples: np.ndarray) -> float:
    # Discrete max over nodes and midpoints, then a bounded 1-D polish around the winner.
    theta = seg.theta
    mids = (theta[:-1] + theta[1:]) / 2
    grid = np.concatenate([theta, mids])
    vals = np.abs(np.concatenate([node_samples, value_fn(mids)]))
    best = int(np.argmax(vals))
    top = float(vals[best])
    if top == 0.0:
        return 0.0
    center = grid[best]
    half = seg.spacing
    lo, hi = max(-seg.h, center - half), min(0.0, center + half)
    res = minimize_scalar(lambda t: -abs(value_fn(t)), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    return max(top, float(-res.fun))


def norm_c(seg: Segment) -> float:
    """Sup norm of the segment's interpolant."""
    return _sup_abs(seg, seg.eval, seg.values)


def norm_c_derivative(seg: Segment) -> float:
    return _sup_abs(seg, seg.eval_derivative, seg.derivatives)


def norm_c1(seg: Segment) -> float:
    """C^1 norm: sup of the value plus sup of the derivative."""
    return norm_c(seg) + norm_c_derivative(seg)
