"""Roots of the characteristic function of v' = A v(t) + B v(t - 1).

For the exchange-rate model A = a, B = -a, so that
Delta(lambda) = lambda - a (1 - exp(-lambda)).  Roots in a rectangle are
found by grid-seeded Newton iteration and certified by the argument
principle; multiplicities come from local winding numbers.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

UNSTABLE, CENTER, STABLE = "unstable", "center", "stable"


class SearchError(RuntimeError):
    """Root bracket not found, or the root search is incomplete."""


class ContourError(RuntimeError):
    """A root sits on the counting contour and inflation did not help."""


@dataclass(frozen=True)
class CharFunction:
    """Delta(lambda) = lambda - A - B exp(-lambda)."""

    A: float
    B: float

    @classmethod
    def exchange(cls, a: float) -> "CharFunction":
        return cls(a, -a)

    def __call__(self, lam):
        return lam - self.A - self.B * np.exp(-lam)

    def derivative(self, lam, order: int = 1):
        if order == 0:
            return self(lam)
        sign = (-1) ** order
        out = -self.B * sign * np.exp(-lam)
        return out + 1.0 if order == 1 else out


def _char(a: float | None, coeffs) -> CharFunction:
    if coeffs is not None:
        return CharFunction(float(coeffs[0]), float(coeffs[1]))
    if a is None:
        raise ValueError("give either a or coeffs")
    return CharFunction.exchange(float(a))


def char_value(lam, a: float):
    return CharFunction.exchange(a)(lam)


def char_derivative(lam, a: float):
    return CharFunction.exchange(a).derivative(lam)


def _bisect(fn, lo: float, hi: float, tol: float = 1e-12) -> float:
    flo = fn(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def real_root_kappa(a: float) -> float | None:
    """The unique nonzero real root of lambda = a (1 - exp(-lambda)).

    Returns None at a = 1 where 0 is a double root instead.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    if abs(a - 1.0) <= 1e-12:
        return None
    delta = CharFunction.exchange(a)
    fn = lambda x: float(delta(x))  # noqa: E731
    # Delta has the sign of (1 - a) x next to 0 and is positive far out,
    # so [tiny, 50] (a > 1) or [-50, -tiny] (a < 1) brackets kappa.
    tiny = min(1e-9, abs(a - 1.0) * 1e-3)
    lo, hi = (tiny, 50.0) if a > 1 else (-50.0, -tiny)
    if fn(lo) * fn(hi) >= 0:
        raise SearchError(f"no sign change for kappa in [{lo}, {hi}] (a={a})")
    root = _bisect(fn, lo, hi)
    for _ in range(3):
        d = float(delta.derivative(root))
        if d == 0.0:
            break
        root -= fn(root) / d
    return root


@dataclass(frozen=True)
class Rect:
    re_min: float
    re_max: float
    im_max: float

    @property
    def im_min(self) -> float:
        return -self.im_max

    def contains(self, lam) -> bool:
        return self.re_min < lam.real < self.re_max and abs(lam.imag) < self.im_max

    def inflate(self, d: float) -> "Rect":
        return Rect(self.re_min - d, self.re_max + d, self.im_max + d)

    @classmethod
    def parse(cls, text: str) -> "Rect":
        """'re_min,re_max,im_min,im_max' with im_min = -im_max, or 're_min,re_max,im_max'."""
        vals = [float(v) for v in text.split(",")]
        if len(vals) == 4:
            if abs(vals[2] + vals[3]) > 1e-12:
                raise ValueError("window must be symmetric in Im")
            return cls(vals[0], vals[1], vals[3])
        if len(vals) == 3:
            return cls(*vals)
        raise ValueError("window needs 3 or 4 comma-separated numbers")


def _phase_change(values_fn, params: np.ndarray, max_rounds: int = 30) -> tuple[float, float]:
    """Total arg change of a closed path, refining until steps are below pi/2.

    Returns (total phase change, min |value| on the refined samples).
    """
    t = np.asarray(params, dtype=float)
    w = values_fn(t)
    for _ in range(max_rounds):
        if not np.all(w != 0):
            return math.nan, 0.0
        dphi = np.angle(w[1:] / w[:-1])
        bad = np.abs(dphi) >= np.pi / 2
        if not bad.any():
            return float(dphi.sum()), float(np.abs(w).min())
        mids = 0.5 * (t[:-1][bad] + t[1:][bad])
        t = np.sort(np.concatenate([t, mids]))
        w = values_fn(t)
    raise ContourError("phase tracking did not resolve the contour")


def _rect_path(rect: Rect):
    corners = np.array([complex(rect.re_min, rect.im_min), complex(rect.re_max, rect.im_min),
                        complex(rect.re_max, rect.im_max), complex(rect.re_min, rect.im_max)])

    def point(s):
        s = np.asarray(s) % 4.0
        k = np.minimum(np.floor(s).astype(int), 3)
        u = s - k
        return corners[k] + u * (corners[(k + 1) % 4] - corners[k])

    return point


def _winding(fn, path, n0: int) -> tuple[int, float]:
    total, min_abs = _phase_change(lambda s: fn(path(s)), np.linspace(0.0, 4.0, n0 + 1))
    if min_abs == 0.0:
        return 0, 0.0
    return int(round(total / (2 * np.pi))), min_abs


def count_roots(rect: Rect, a: float | None = None, *, coeffs=None, samples_per_unit: int = 8,
                on_contour_tol: float = 1e-8) -> int:
    """Number of roots inside ``rect`` counted with multiplicity."""
    delta = _char(a, coeffs)
    r = rect
    for _ in range(6):
        perim = 2 * (r.re_max - r.re_min) + 4 * r.im_max
        n0 = max(64, int(perim * samples_per_unit))
        # 4 edges of unequal length share the parameter range [0, 4)
        n0 = 4 * int(math.ceil(n0 / 4))
        count, min_abs = _winding(delta, _rect_path(r), n0)
        if min_abs > on_contour_tol:
            return count
        r = r.inflate(1e-3)
    raise ContourError(f"root on contour of {rect}")


def count_roots_circle(center: complex, radius: float, a: float | None = None, *, coeffs=None,
                       samples: int = 256) -> int:
    delta = _char(a, coeffs)
    path = lambda s: center + radius * np.exp(0.5j * np.pi * np.asarray(s))  # noqa: E731
    count, min_abs = _winding(delta, path, samples)
    if min_abs == 0.0:
        raise ContourError("root on circle")
    return count


@dataclass(frozen=True)
class Root:
    value: complex
    multiplicity: int
    klass: str

    @property
    def re(self) -> float:
        return self.value.real

    @property
    def im(self) -> float:
        return self.value.imag


@dataclass(frozen=True)
class SpectrumSplit:
    sigma_u: tuple[Root, ...]
    sigma_c: tuple[Root, ...]
    sigma_s: tuple[Root, ...]
    window: Rect
    counted: int
    found: int
    coeffs: tuple[float, float] = field(default=(0.0, 0.0))

    @property
    def roots(self) -> tuple[Root, ...]:
        return self.sigma_u + self.sigma_c + self.sigma_s

    @property
    def certified(self) -> bool:
        return self.counted == self.found

    @property
    def rightmost_stable_re(self) -> float | None:
        return max((r.re for r in self.sigma_s), default=None)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re", "im", "multiplicity", "class"])
        for r in sorted(self.roots, key=lambda r: (-r.re, r.im)):
            w.writerow([f"{r.re:.17g}", f"{r.im:.17g}", r.multiplicity, r.klass])
        return buf.getvalue()


def _newton(delta: CharFunction, z: np.ndarray, iters: int = 60) -> tuple[np.ndarray, np.ndarray]:
    z = z.astype(complex)
    ok = np.ones(z.shape, dtype=bool)
    for _ in range(iters):
        with np.errstate(all="ignore"):
            step = delta(z) / delta.derivative(z)
        step[~np.isfinite(step)] = 0.0
        z = z - step
        ok &= np.isfinite(z) & (np.abs(z.real) < 1e3)
        z[~ok] = 0.0
        if np.all(np.abs(step[ok]) < 1e-15 * np.maximum(1.0, np.abs(z[ok]))):
            break
    return z, ok


def _polish(delta: CharFunction, lam: complex, mult: int) -> complex:
    # Newton on the (m-1)-th derivative keeps quadratic convergence at an m-fold root.
    order = mult - 1
    for _ in range(50):
        d0 = delta.derivative(lam, order)
        d1 = delta.derivative(lam, order + 1)
        if d1 == 0:
            break
        step = d0 / d1
        lam -= step
        if abs(step) < 1e-16 * max(1.0, abs(lam)):
            break
    return complex(lam)


def _classify(lam: complex, center_tol: float) -> str:
    if lam.real > center_tol:
        return UNSTABLE
    if lam.real < -center_tol:
        return STABLE
    return CENTER


def find_roots(window: Rect, a: float | None = None, *, coeffs=None, seed_spacing: float = 0.5,
               center_tol: float = 1e-9, dedup_tol: float = 1e-6, refinements: int = 2) -> SpectrumSplit:
    """All characteristic roots inside ``window``, partitioned by real part."""
    delta = _char(a, coeffs)
    counted = count_roots(window, coeffs=(delta.A, delta.B))
    spacing = seed_spacing
    found: list[Root] = []
    for _ in range(refinements + 1):
        found = _search(delta, window, spacing, center_tol, dedup_tol)
        total = sum(r.multiplicity for r in found)
        if total == counted:
            break
        spacing /= 2
    total = sum(r.multiplicity for r in found)
    if total != counted:
        raise SearchError(f"incomplete root search: found {total}, argument principle counts {counted}")
    split = {UNSTABLE: [], CENTER: [], STABLE: []}
    for r in sorted(found, key=lambda r: (-r.re, r.im)):
        split[r.klass].append(r)
    return SpectrumSplit(tuple(split[UNSTABLE]), tuple(split[CENTER]), tuple(split[STABLE]),
                         window, counted, total, (delta.A, delta.B))


def _search(delta: CharFunction, window: Rect, spacing: float, center_tol: float,
            dedup_tol: float) -> list[Root]:
    re = np.arange(window.re_min, window.re_max + 1e-12, spacing)
    im = np.arange(0.0, window.im_max + 1e-12, spacing)
    seeds = (re[:, None] + 1j * im[None, :]).ravel()
    z, ok = _newton(delta, seeds)
    z = z[ok]
    z = z[np.abs(delta(z)) <= 1e-8 * np.maximum(1.0, np.abs(z))]
    z = np.where(np.abs(z.imag) < 1e-10, z.real + 0j, z)
    z = z[(z.real > window.re_min) & (z.real < window.re_max) & (np.abs(z.imag) < window.im_max)]
    clusters: list[complex] = []
    for lam in sorted(z, key=lambda c: (c.real, c.imag)):
        if not any(abs(lam - c) < dedup_tol for c in clusters):
            clusters.append(complex(lam))
    # closure under conjugation for the real-coefficient equation
    upper = [c for c in clusters if c.imag >= 0]
    roots: list[Root] = []
    for lam in upper:
        mult = count_roots_circle(lam, 1e-4, coeffs=(delta.A, delta.B), samples=64)
        lam = _polish(delta, lam, max(mult, 1))
        if abs(lam.imag) < 1e-12:
            lam = complex(lam.real, 0.0)
        if abs(lam.real) < 1e-15:
            lam = complex(0.0, lam.imag)
        roots.append(Root(lam, mult, _classify(lam, center_tol)))
        if lam.imag != 0.0:
            roots.append(Root(lam.conjugate(), mult, _classify(lam, center_tol)))
    return roots


def rightmost(split: SpectrumSplit) -> Root:
    return max(split.roots, key=lambda r: r.re)
