import numpy as np
import pytest

from sdde_stab.model import (ConstructionError, DelayFunction, Model, ModelError, admissibility_residual,
                             correct_to_manifold, in_domain, linear_part, make_admissible, nonlinear_part,
                             rhs_f, validate_delay)
from sdde_stab.segment import Segment, norm_c1

from conftest import random_segment

RAMP = Segment.from_function(lambda t: t, lambda t: np.ones_like(t))


def test_constant_delay_passes_validation():
    report = validate_delay(DelayFunction.constant(1.0))
    assert report.passed
    for name in ("DF1", "DF2", "DF3", "DF4"):
        assert report[name].passed


def test_rational_bump_matches_analytic_form():
    d = DelayFunction.rational_bump(1.0)
    assert validate_delay(d).passed
    s = np.linspace(-4, 4, 81)
    assert np.allclose(d(s), 1.0 / (1.0 + s ** 2), rtol=0, atol=1e-15)
    assert np.allclose(d(s), d(-s))
    assert np.max(d(s)) == d(0.0) == 1.0


def test_table_with_wrong_peak_fails_df4():
    s = np.linspace(0, 5, 51)
    d = DelayFunction.user_table(s, 0.9 / (1 + s ** 2))
    report = validate_delay(d)
    assert not report.passed
    assert not report["DF4"].passed
    assert "r(0)=0.9" in report["DF4"].detail


def test_df5_is_informational_only():
    report = validate_delay(DelayFunction.rational_bump(1.0), a=5.0)
    assert report.passed
    assert not report["DF5"].passed


def test_model_rejects_bad_parameters():
    with pytest.raises(ModelError):
        Model(-1.0, DelayFunction.constant())
    with pytest.raises(ModelError):
        Model(0.5, DelayFunction.constant(0.9))


def test_rhs_examples(const_model_half, bump_model_half):
    assert rhs_f(const_model_half, Segment.zero()) == 0.0
    assert rhs_f(const_model_half, Segment.constant(0.5)) == pytest.approx(-0.25)
    assert rhs_f(const_model_half, RAMP) == pytest.approx(0.5)
    assert linear_part(bump_model_half, RAMP) == pytest.approx(0.5)
    assert nonlinear_part(bump_model_half, RAMP) == pytest.approx(0.0, abs=1e-15)
    assert nonlinear_part(bump_model_half, Segment.zero()) == 0.0


def test_constant_delay_nonlinear_part_is_quadratic(const_model_half, rng):
    for _ in range(20):
        seg = random_segment(rng)
        x0 = seg.eval(0.0)
        assert nonlinear_part(const_model_half, seg) == pytest.approx(-abs(x0) * x0, abs=1e-14)


def test_splitting_identity(bump_model_half, rng):
    worst = 0.0
    for _ in range(1000):
        seg = random_segment(rng, n=33, scale=0.5)
        f = rhs_f(bump_model_half, seg)
        worst = max(worst, abs(f - linear_part(bump_model_half, seg) - nonlinear_part(bump_model_half, seg)))
    assert worst < 1e-12


def test_delay_outside_horizon_is_a_model_violation():
    s = np.linspace(0, 5, 51)
    model = Model(0.5, DelayFunction.user_table(s, 1.0 / (1 + s ** 2)))
    assert rhs_f(model, Segment.constant(0.0)) == 0.0
    bad = Model.__new__(Model)
    object.__setattr__(bad, "a", 0.5)
    object.__setattr__(bad, "delay", DelayFunction.constant(1.5))
    object.__setattr__(bad, "h", 1.0)
    with pytest.raises(ModelError):
        rhs_f(bad, Segment.constant(0.1))


def test_make_admissible_affine_branch(const_model_half):
    assert norm_c1(make_admissible(const_model_half, 0.0)) == 0.0
    seg = make_admissible(const_model_half, 0.1)
    assert seg.eval_derivative(0.0) == pytest.approx(-0.02, abs=1e-15)
    assert admissibility_residual(const_model_half, seg) < 1e-12


def test_make_admissible_exponential_branch():
    model = Model(2.0, DelayFunction.constant())
    seg = make_admissible(model, 1e-4)
    assert admissibility_residual(model, seg) < 1e-12
    assert seg.eval(0.0) == pytest.approx(1e-4)


@pytest.mark.parametrize("a", [0.25, 0.5, 0.9, 2.0, 3.0])
@pytest.mark.parametrize("eps", [-0.2, -0.01, 0.05, 0.15, 0.3])
def test_make_admissible_always_on_manifold(a, eps):
    model = Model(a, DelayFunction.rational_bump(1.0))
    assert admissibility_residual(model, make_admissible(model, eps)) < 1e-10


def test_correct_to_manifold(bump_model_half, rng):
    seg = correct_to_manifold(bump_model_half, random_segment(rng, scale=0.05))
    assert admissibility_residual(bump_model_half, seg) < 1e-10


def test_nonlinearity_is_second_order(bump_model_half, rng):
    for _ in range(10):
        d = random_segment(rng)
        d = d * (1.0 / norm_c1(d))
        ratios = [abs(nonlinear_part(bump_model_half, d * s)) / s ** 2 for s in 1e-2 / 2.0 ** np.arange(11)]
        assert max(ratios) < 10 * min(ratios)


def test_domain_and_config_round_trip(bump_model_half):
    assert in_domain(bump_model_half, Segment.constant(1.0))
    assert not in_domain(bump_model_half, Segment.constant(20.0))
    assert Model.from_config(bump_model_half.to_config()).to_config() == bump_model_half.to_config()
    assert issubclass(ConstructionError, RuntimeError)
