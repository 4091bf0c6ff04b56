import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sdde_stab.segment import DomainError, Segment, norm_c, norm_c1

from conftest import KAPPA_2, exp_segment, random_segment


def test_zero_segment_evaluates_to_zero():
    seg = Segment.zero()
    assert seg.eval(-0.37) == 0.0
    assert np.all(seg.eval_derivative(np.linspace(-1, 0, 11)) == 0.0)


@given(st.floats(-1.0, 0.0))
def test_constant_reproduced_exactly(theta):
    assert Segment.constant(1.0).eval(theta) == 1.0


def test_exponential_value_and_derivative():
    seg = exp_segment(KAPPA_2)
    assert abs(seg.eval(-0.5) - np.exp(-0.5 * KAPPA_2)) < 1e-9
    assert abs(seg.eval_derivative(0.0) - KAPPA_2) < 1e-8


def test_linear_function_has_unit_derivative():
    seg = Segment.from_function(lambda t: t, lambda t: np.ones_like(t))
    assert np.allclose(seg.eval_derivative(np.linspace(-1, 0, 37)), 1.0, atol=1e-13)


def test_exact_at_nodes():
    seg = exp_segment(0.7, n=17)
    assert np.array_equal(seg.eval(seg.theta), seg.values)
    assert np.array_equal(seg.eval_derivative(seg.theta), seg.derivatives)


@pytest.mark.parametrize("theta", [-1.0001, 0.0001, 2.0])
def test_evaluation_outside_domain_raises(theta):
    seg = Segment.zero()
    with pytest.raises(DomainError):
        seg.eval(theta)
    with pytest.raises(DomainError):
        seg.eval_derivative(theta)


def test_norms_of_simple_segments():
    assert norm_c(Segment.zero()) == 0.0 and norm_c1(Segment.zero()) == 0.0
    ramp = Segment.from_function(lambda t: t, lambda t: np.ones_like(t))
    assert norm_c(ramp) == pytest.approx(1.0, abs=1e-14)
    assert norm_c1(ramp) == pytest.approx(2.0, abs=1e-12)
    seg = exp_segment(KAPPA_2)
    assert norm_c(seg) == pytest.approx(1.0, abs=1e-14)
    assert norm_c1(seg) == pytest.approx(1.0 + KAPPA_2, abs=1e-12)


def test_interior_maximum_is_polished():
    seg = Segment.from_function(lambda t: np.sin(np.pi * (t + 0.3) * 1.37), lambda t: 1.37 * np.pi * np.cos(np.pi * (t + 0.3) * 1.37), n=9)
    fine = np.linspace(-1, 0, 200001)
    assert norm_c(seg) >= np.max(np.abs(seg.eval(fine))) - 1e-12


def test_round_trip_fourth_order():
    f = lambda t: np.sin(3 * t) * np.exp(t)  # noqa: E731
    df = lambda t: (3 * np.cos(3 * t) + np.sin(3 * t)) * np.exp(t)  # noqa: E731
    errs = []
    for n in (17, 33, 65):
        seg = Segment.from_function(f, df, 1.0, n)
        fine = np.linspace(-1, 0, 10 * n)
        errs.append(np.max(np.abs(seg.eval(fine) - f(fine))))
    for coarse, fine_err in zip(errs, errs[1:]):
        assert 16 * 0.7 <= coarse / fine_err <= 16 * 1.3


def test_homogeneity_and_triangle(rng):
    for _ in range(25):
        p, q = random_segment(rng), random_segment(rng)
        alpha = rng.normal() * 3
        assert norm_c1(p * alpha) == pytest.approx(abs(alpha) * norm_c1(p), rel=1e-12)
        assert norm_c1(p + q) <= norm_c1(p) + norm_c1(q) + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4), st.lists(st.floats(-5, 5), min_size=4, max_size=4))
def test_segments_are_immutable_and_csv_round_trips(vals, ders):
    seg = Segment(1.0, vals, ders)
    with pytest.raises(ValueError):
        seg.values[0] = 1.0
    back = Segment.from_csv(seg.to_csv())
    assert np.array_equal(back.values, seg.values)
    assert np.array_equal(back.derivatives, seg.derivatives)
    assert seg.to_csv().splitlines()[0] == "theta,value,derivative"


def test_integral_is_exact_for_cubics():
    seg = Segment.from_function(lambda t: t ** 3 - t, lambda t: 3 * t ** 2 - 1, 1.0, 5)
    assert seg.integral() == pytest.approx(0.25, abs=1e-15)
