import json

import numpy as np
import pytest

from sdde_stab.integrator import integrate
from sdde_stab.model import DelayFunction, Model, make_admissible
from sdde_stab.projection import CenterBasis, center_curve
from sdde_stab.reduction import (INDEFINITE, STRICT_STABLE, STRICT_UNSTABLE, FitError, FitWindow,
                                 analytic_coefficient, analytic_reduced_field, closed_form_reduced,
                                 fit_reduced_field, integrate_reduced, lyapunov_check)
from sdde_stab.segment import Segment


@pytest.fixture(scope="module")
def half_runs():
    model = Model(0.5, DelayFunction.rational_bump(1.0))
    return [integrate(model, make_admissible(model, e), 100.0) for e in (0.05, 0.1, 0.15)]


def test_analytic_field():
    assert analytic_reduced_field(0.5, 0.0) == 0.0
    assert analytic_reduced_field(0.5, 0.1) == pytest.approx(-0.02)
    z = np.linspace(-1, 1, 41)
    assert np.array_equal(analytic_reduced_field(0.3, -z), -analytic_reduced_field(0.3, z))
    with pytest.raises(ValueError):
        analytic_coefficient(1.0)


def test_reduced_integration_matches_closed_form():
    assert np.all(integrate_reduced(0.5, 0.0, 10.0).z == 0.0)
    curve = integrate_reduced(0.5, 0.1, 100.0)
    assert curve.z[-1] == pytest.approx(1 / 210, rel=1e-8)
    assert np.allclose(curve.z, closed_form_reduced(0.5, 0.1, curve.t), rtol=1e-8, atol=0)
    neg = integrate_reduced(0.5, -0.1, 100.0)
    assert np.allclose(neg.z, -curve.z)


def test_algebraic_limit():
    curve = integrate_reduced(0.5, 0.1, 500.0)
    assert abs(500.0 * curve.z[-1] - 0.5) < 0.01


def test_blowup_flagged_for_negative_coefficient():
    curve = integrate_reduced(2.0, 0.1, 100.0)
    assert curve.escaped and abs(curve.z[-1]) >= 10


def test_lyapunov_examples():
    assert lyapunov_check(lambda z: analytic_reduced_field(0.5, z), (1e-4, 0.3)) == STRICT_STABLE
    assert lyapunov_check(lambda z: z ** 2, (1e-4, 0.1)) == INDEFINITE
    assert lyapunov_check(lambda z: np.abs(z) * z, (1e-4, 0.1)) == STRICT_UNSTABLE
    with pytest.raises(ValueError):
        lyapunov_check(lambda z: z, (0.1, 0.01))


def test_fit_recovers_coefficient(half_runs):
    field = fit_reduced_field(half_runs, CenterBasis(0.5))
    assert abs(field.c_fitted - 2.0) / 2.0 < 0.05
    assert field.n_samples >= 50
    report = json.loads(field.to_json())
    assert set(report) == {"a", "c_analytic", "c_fitted", "stderr", "n_samples", "window", "residual_max"}
    assert report["c_analytic"] == 2.0


def test_fit_stable_under_stride_and_eps(half_runs):
    basis = CenterBasis(0.5)
    base = fit_reduced_field(half_runs, basis)
    half_stride = fit_reduced_field(half_runs, basis, FitWindow(stride=0.025))
    assert abs(half_stride.c_fitted - base.c_fitted) < 2 * base.stderr + 1e-3
    singles = [fit_reduced_field([r], basis).c_fitted for r in half_runs]
    assert max(singles) - min(singles) < 0.02


def test_fit_on_zero_trajectory_fails(bump_model_half):
    traj = integrate(bump_model_half, Segment.zero(), 100.0)
    with pytest.raises(FitError):
        fit_reduced_field([traj], CenterBasis(0.5))


def test_too_few_samples_fails(half_runs):
    with pytest.raises(FitError):
        fit_reduced_field(half_runs, CenterBasis(0.5), FitWindow(t_max=6.0))


def test_on_manifold_decay_is_algebraic(half_runs):
    z = center_curve(CenterBasis(0.5), half_runs[1], [50.0, 100.0])
    assert abs(100.0 * z[1] - 0.5) < 0.1
    assert abs(np.log(z[1]) / 100.0) < abs(np.log(z[0]) / 50.0)


def test_reduced_ode_tracks_projection(half_runs):
    basis = CenterBasis(0.5)
    field = fit_reduced_field(half_runs, basis)
    t0 = field.window["t_min"]
    t = np.arange(t0, 100.0, 0.5)
    z = center_curve(basis, half_runs[1], t)
    curve = integrate_reduced(0.5, z[0], t[-1] - t0, dt=0.5, coefficient=field.c_fitted)
    assert np.max(np.abs(curve.z - z) / np.abs(z)) < 0.05
