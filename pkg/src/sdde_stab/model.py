"""The exchange-rate model x'(t) = a[x(t) - x(t - r(x(t)))] - |x(t)| x(t).

Delay function families, the right-hand side f on segments, its splitting
into the linear part L and remainder g, and construction of initial data
satisfying the compatibility condition phi'(0) = f(phi).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .segment import DEFAULT_NODES, Segment, hermite_derivative, hermite_value, norm_c1

CONSTANT, RATIONAL_BUMP, USER_TABLE = "constant", "rational_bump", "user_table"
DELAY_KINDS = (CONSTANT, RATIONAL_BUMP, USER_TABLE)


class ModelError(ValueError):
    """Invalid model data or an evaluation that leaves the model's domain."""


class ConstructionError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class DelayFunction:
    """An even delay function r(s) of the state.

    ``constant``: r(s) = r0.  ``rational_bump``: r(s) = 1 / (1 + c s^2).
    ``user_table``: Hermite data on a uniform grid 0 = s_0 < ... < s_max,
    extended evenly to negative s and by the end value beyond s_max.
    """

    kind: str = CONSTANT
    r0: float = 1.0
    c: float = 1.0
    table_s: np.ndarray | None = None
    table_r: np.ndarray | None = None
    table_dr: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in DELAY_KINDS:
            raise ModelError(f"unknown delay kind {self.kind!r}")
        if self.kind == RATIONAL_BUMP and not self.c > 0:
            raise ModelError("rational_bump needs c > 0")
        if self.kind == USER_TABLE:
            s = np.asarray(self.table_s, dtype=float)
            r = np.asarray(self.table_r, dtype=float)
            if s.ndim != 1 or s.size < 2 or s.shape != r.shape:
                raise ModelError("user_table needs matching 1-D s and r arrays")
            if s[0] != 0.0 or not np.allclose(np.diff(s), s[1] - s[0], rtol=1e-9, atol=0):
                raise ModelError("user_table s grid must be uniform and start at 0")
            if self.table_dr is None:
                dr = np.gradient(r, s)
                dr[0] = 0.0  # evenness forces r'(0) = 0
            else:
                dr = np.asarray(self.table_dr, dtype=float)
            for name, arr in (("table_s", s), ("table_r", r), ("table_dr", dr)):
                arr = np.array(arr)
                arr.flags.writeable = False
                object.__setattr__(self, name, arr)
            object.__setattr__(self, "r0", float(r[0]))

    @classmethod
    def constant(cls, r0: float = 1.0) -> "DelayFunction":
        return cls(CONSTANT, r0=float(r0))

    @classmethod
    def rational_bump(cls, c: float = 1.0) -> "DelayFunction":
        return cls(RATIONAL_BUMP, r0=1.0, c=float(c))

    @classmethod
    def user_table(cls, s, r, dr=None) -> "DelayFunction":
        return cls(USER_TABLE, table_s=s, table_r=r, table_dr=dr)

    @classmethod
    def from_config(cls, block: dict) -> "DelayFunction":
        block = dict(block)
        kind = block.pop("kind", CONSTANT)
        allowed = {CONSTANT: {"r0"}, RATIONAL_BUMP: {"c"}, USER_TABLE: {"s", "r", "dr"}}.get(kind)
        if allowed is None:
            raise ModelError(f"unknown delay kind {kind!r}")
        unknown = set(block) - allowed
        if unknown:
            raise ModelError(f"unknown delay keys for {kind}: {sorted(unknown)}")
        if kind == CONSTANT:
            return cls.constant(block.get("r0", 1.0))
        if kind == RATIONAL_BUMP:
            return cls.rational_bump(block.get("c", 1.0))
        return cls.user_table(block["s"], block["r"], block.get("dr"))

    def to_config(self) -> dict:
        if self.kind == CONSTANT:
            return {"kind": CONSTANT, "r0": self.r0}
        if self.kind == RATIONAL_BUMP:
            return {"kind": RATIONAL_BUMP, "c": self.c}
        return {"kind": USER_TABLE, "s": self.table_s.tolist(), "r": self.table_r.tolist(),
                "dr": self.table_dr.tolist()}

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == CONSTANT:
            out = np.full_like(s, self.r0)
        elif self.kind == RATIONAL_BUMP:
            out = 1.0 / (1.0 + self.c * s * s)
        else:
            out = self._table(np.abs(s), hermite_value)
        return out if out.ndim else float(out)

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == CONSTANT:
            out = np.zeros_like(s)
        elif self.kind == RATIONAL_BUMP:
            out = -2.0 * self.c * s / (1.0 + self.c * s * s) ** 2
        else:
            out = np.sign(s) * self._table(np.abs(s), hermite_derivative, outside=0.0)
        return out if out.ndim else float(out)

    def _table(self, x, rule, outside=None):
        s, r, dr = self.table_s, self.table_r, self.table_dr
        dx = s[1] - s[0]
        xc = np.minimum(x, s[-1])
        k = np.clip(np.floor(xc / dx).astype(int), 0, s.size - 2)
        out = rule((xc - s[k]) / dx, dx, r[k], r[k + 1], dr[k], dr[k + 1])
        beyond = x > s[-1]
        if np.any(beyond):
            out = np.where(beyond, r[-1] if outside is None else outside, out)
        return out


@dataclass(frozen=True)
class HypothesisCheck:
    name: str
    passed: bool
    detail: str = ""
    worst_s: float | None = None


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[HypothesisCheck, ...]
    informational: tuple[HypothesisCheck, ...] = ()

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> HypothesisCheck:
        for c in self.checks + self.informational:
            if c.name == name:
                return c
        raise KeyError(name)


def validate_delay(delay: DelayFunction, grid_span: float = 5.0, grid_points: int = 2001,
                   a: float | None = None) -> ValidationReport:
    """Check the delay hypotheses DF1-DF4 on a symmetric sample grid.

    DF5 (|r'(s)| < 1/(4a^2) on [-2a, 2a]) is evaluated only when ``a`` is
    given and is reported as informational; it never affects ``passed``.
    """
    if grid_points < 3:
        raise ValueError("grid_points must be >= 3")
    s = np.linspace(-grid_span, grid_span, grid_points)
    r = np.asarray(delay(s))
    dr = np.asarray(delay.derivative(s))
    r0 = float(delay(0.0))

    finite = np.isfinite(r) & np.isfinite(dr)
    df1 = HypothesisCheck("DF1", bool(finite.all()),
                          "" if finite.all() else "non-finite r or r'")

    bad2 = (r <= 0) | (r > r0 + 1e-15)
    k = int(np.argmax(np.where(bad2, np.abs(r - r0), -1.0))) if bad2.any() else None
    df2 = HypothesisCheck("DF2", not bad2.any(),
                          "" if k is None else f"r({s[k]:.6g})={r[k]:.6g} with r(0)={r0:.6g}",
                          None if k is None else float(s[k]))

    asym = np.abs(r - r[::-1])
    k3 = int(np.argmax(asym))
    df3 = HypothesisCheck("DF3", bool(asym[k3] <= 1e-12),
                          "" if asym[k3] <= 1e-12 else f"|r(s)-r(-s)|={asym[k3]:.3g} at s={s[k3]:.6g}",
                          None if asym[k3] <= 1e-12 else float(s[k3]))

    df4 = HypothesisCheck("DF4", abs(r0 - 1.0) <= 1e-12, "" if abs(r0 - 1.0) <= 1e-12 else f"r(0)={r0:g}",
                          None if abs(r0 - 1.0) <= 1e-12 else 0.0)

    info = ()
    if a is not None:
        ss = np.linspace(-2 * a, 2 * a, grid_points)
        slope = np.abs(np.asarray(delay.derivative(ss)))
        k5 = int(np.argmax(slope))
        ok = bool(slope[k5] < 1.0 / (4 * a * a))
        info = (HypothesisCheck("DF5", ok, f"max|r'|={slope[k5]:.6g} vs bound {1 / (4 * a * a):.6g}",
                                float(ss[k5])),)
    return ValidationReport((df1, df2, df3, df4), info)


@dataclass(frozen=True)
class Model:
    """The exchange-rate model with parameter ``a`` and delay function ``delay``."""

    a: float
    delay: DelayFunction = field(default_factory=DelayFunction.constant)
    h: float = 1.0
    grid_nodes: int = DEFAULT_NODES
    radius: float = 10.0

    def __post_init__(self):
        if not self.a > 0:
            raise ModelError("parameter a must be positive")
        report = validate_delay(self.delay)
        if not report.passed:
            failed = "; ".join(f"{c.name}: {c.detail}" for c in report.checks if not c.passed)
            raise ModelError(f"delay violates hypotheses ({failed})")

    @property
    def linear_coeffs(self) -> tuple[float, float]:
        """Coefficients (A, B) of the linearization v' = A v(t) + B v(t - 1)."""
        return self.a, -self.a

    @classmethod
    def from_config(cls, block: dict) -> "Model":
        block = dict(block)
        unknown = set(block) - {"a", "delay", "grid_nodes", "radius"}
        if unknown:
            raise ModelError(f"unknown model keys: {sorted(unknown)}")
        if "a" not in block:
            raise ModelError("model config needs 'a'")
        delay = DelayFunction.from_config(block.get("delay", {"kind": CONSTANT}))
        return cls(float(block["a"]), delay, grid_nodes=int(block.get("grid_nodes", DEFAULT_NODES)),
                   radius=float(block.get("radius", 10.0)))

    def to_config(self) -> dict:
        return {"a": self.a, "delay": self.delay.to_config(), "grid_nodes": self.grid_nodes,
                "radius": self.radius}


def _delayed_arg(model: Model, phi: Segment) -> tuple[float, float]:
    x0 = float(phi.values[-1])
    r = float(model.delay(x0))
    if not 0.0 < r <= model.h:
        raise ModelError(f"delay r({x0:g})={r:g} outside (0, {model.h}]")
    return x0, r


def rhs_f(model: Model, phi: Segment) -> float:
    x0, r = _delayed_arg(model, phi)
    return model.a * (x0 - phi.eval(-r)) - abs(x0) * x0


def linear_part(model: Model, phi: Segment) -> float:
    return model.a * (float(phi.values[-1]) - float(phi.values[0]))


def nonlinear_part(model: Model, phi: Segment) -> float:
    x0, r = _delayed_arg(model, phi)
    return model.a * (float(phi.values[0]) - phi.eval(-r)) - abs(x0) * x0


def in_domain(model: Model, phi: Segment) -> bool:
    """Whether phi lies in the ball of radius ``model.radius`` in C^1."""
    return norm_c1(phi) < model.radius


def admissibility_residual(model: Model, phi: Segment) -> float:
    """|phi'(0) - f(phi)|; zero exactly on the solution manifold."""
    return abs(float(phi.derivatives[-1]) - rhs_f(model, phi))


def make_admissible(model: Model, eps: float, kappa: float | None = None) -> Segment:
    """Build a segment with phi(0) = eps satisfying phi'(0) = f(phi).

    Affine branch phi(t) = eps + beta t for a <= 1 (closed form). For a > 1,
    or when a r(eps) = 1, the exponential branch
    phi(t) = eps exp(kappa t) + beta t is used, with beta fixed by Newton on
    the compatibility residual; ``kappa`` defaults to the nonzero real
    characteristic root when it exists.
    """
    n, h, a = model.grid_nodes, model.h, model.a
    if eps == 0.0:
        return Segment.zero(h, n)
    r_eps = float(model.delay(eps))
    if a <= 1.0 and abs(a * r_eps - 1.0) > 1e-9:
        beta = -eps * abs(eps) / (1.0 - a * r_eps)
        return Segment.from_function(lambda t: eps + beta * t, lambda t: beta + 0.0 * t, h, n)

    if kappa is None:
        from .spectrum import real_root_kappa

        kappa = real_root_kappa(a) if abs(a - 1.0) > 1e-12 else 1.0

    def build(beta):
        return Segment.from_function(lambda t: eps * np.exp(kappa * t) + beta * t,
                                     lambda t: eps * kappa * np.exp(kappa * t) + beta, h, n)

    def resid(beta):
        seg = build(beta)
        return float(seg.derivatives[-1]) - rhs_f(model, seg), seg

    beta = 0.0
    for _ in range(50):
        res, seg = resid(beta)
        if abs(res) <= 1e-13 * max(1.0, abs(eps)):
            return seg
        step = 1e-6 * max(abs(beta), abs(eps), 1e-8)
        slope = (resid(beta + step)[0] - res) / step
        if slope == 0.0 or not math.isfinite(slope):
            break
        beta -= res / slope
    res, seg = resid(beta)
    if abs(res) <= 1e-12:
        return seg
    raise ConstructionError(f"compatibility Newton did not converge (residual {res:.3g})")


def correct_to_manifold(model: Model, seg: Segment) -> Segment:
    """Add beta * theta to ``seg`` so that the result satisfies phi'(0) = f(phi).

    phi(0) and hence the delay r(phi(0)) are unchanged, which makes the
    compatibility condition affine in beta.
    """
    x0, r = _delayed_arg(model, seg)
    denom = 1.0 - model.a * r
    if abs(denom) < 1e-12:
        raise ConstructionError("a r(phi(0)) = 1: linear correction is singular")
    beta = (rhs_f(model, seg) - float(seg.derivatives[-1])) / denom
    theta = seg.theta
    return seg + Segment(seg.h, beta * theta, np.full(seg.n, beta))


@dataclass(frozen=True)
class LinearDelayModel:
    """v'(t) = A v(t) + B v(t - 1); used where only the spectrum matters."""

    A: float
    B: float
    h: float = 1.0

    @property
    def linear_coeffs(self) -> tuple[float, float]:
        return self.A, self.B
