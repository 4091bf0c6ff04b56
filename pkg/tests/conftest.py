"""Shared fixtures and independent oracles."""
import math

import numpy as np
import pytest

from sdde_stab import DelayFunction, Model, Segment


def kappa_oracle(a, lo, hi, tol=1e-13):
    """Plain bisection on lam - a(1 - exp(-lam)) over a caller-supplied bracket."""
    f = lambda x: x - a * (1.0 - math.exp(-x))  # noqa: E731
    flo = f(lo)
    assert flo * f(hi) < 0, "bracket does not change sign"
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm * flo <= 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


KAPPA_2 = kappa_oracle(2.0, 1.5, 1.6)
KAPPA_HALF = kappa_oracle(0.5, -1.3, -1.2)


def exp_segment(k, n=256):
    return Segment.from_function(lambda t: np.exp(k * t), lambda t: k * np.exp(k * t), 1.0, n)


def random_segment(rng, n=256, modes=4, scale=1.0):
    """Smooth random segment: a short trigonometric series on [-1, 0]."""
    c = rng.normal(size=modes) * scale
    s = rng.normal(size=modes) * scale
    k = np.arange(1, modes + 1) * np.pi

    def f(t):
        t = np.asarray(t, dtype=float)
        return sum(c[i] * np.cos(k[i] * t) + s[i] * np.sin(k[i] * t) for i in range(modes))

    def df(t):
        t = np.asarray(t, dtype=float)
        return sum(-c[i] * k[i] * np.sin(k[i] * t) + s[i] * k[i] * np.cos(k[i] * t) for i in range(modes))

    return Segment.from_function(f, df, 1.0, n)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


@pytest.fixture(scope="session")
def bump_model_half():
    return Model(0.5, DelayFunction.rational_bump(1.0))


@pytest.fixture(scope="session")
def const_model_half():
    return Model(0.5, DelayFunction.constant(1.0))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
