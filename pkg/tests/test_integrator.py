import numpy as np
import pytest

from sdde_stab import _rk4py, kernels
from sdde_stab.integrator import (BLOWUP_STOPPED, COMPLETED, AdmissibilityError, IntegrationOptions,
                                  integrate, integrate_linear, max_residual, residual, segment_at)
from sdde_stab.model import DelayFunction, Model, make_admissible
from sdde_stab.segment import DomainError, Segment, norm_c, norm_c1

from conftest import KAPPA_2, KAPPA_HALF, exp_segment, random_segment


@pytest.fixture(scope="module")
def bump_run():
    model = Model(0.5, DelayFunction.rational_bump(1.0))
    return integrate(model, make_admissible(model, 0.1), 200.0)


def test_zero_initial_data_stays_zero(const_model_half):
    traj = integrate(const_model_half, Segment.zero(), 10.0)
    assert traj.status == COMPLETED
    assert np.all(traj.xs == 0.0) and np.all(traj.xps == 0.0)
    assert norm_c1(segment_at(traj, 7.3)) == 0.0
    assert residual(traj, 4.2) == 0.0


def test_inadmissible_constant_is_rejected(const_model_half):
    with pytest.raises(AdmissibilityError):
        integrate(const_model_half, Segment.constant(1e-3), 1.0)


def test_long_run_completes_and_decays(bump_run):
    assert bump_run.status == COMPLETED
    norms = [norm_c1(segment_at(bump_run, t)) for t in np.arange(10.0, 200.0 + 1e-9, 5.0)]
    assert all(b < a for a, b in zip(norms, norms[1:]))


def test_long_run_matches_fine_pure_python_solution(bump_model_half, monkeypatch):
    phi = make_admissible(bump_model_half, 0.1)
    coarse = integrate(bump_model_half, phi, 20.0)
    monkeypatch.setattr(kernels, "integrate_rk4", _rk4py.integrate_rk4)
    fine = integrate(bump_model_half, phi, 20.0, IntegrationOptions(dt=2.5e-4))
    t = np.linspace(0, 20, 401)
    assert np.max(np.abs(coarse.eval(t) - fine.eval(t))) < 1e-6


def test_residual_small_at_random_times(bump_run, rng):
    times = rng.uniform(0, 200, 100)
    assert max_residual(bump_run, times) < 1e-6


def test_residual_outside_range_raises(bump_run):
    with pytest.raises(DomainError):
        residual(bump_run, 200.5)
    with pytest.raises(DomainError):
        segment_at(bump_run, -0.1)


def test_segment_at_zero_returns_initial(bump_run):
    seg = segment_at(bump_run, 0.0)
    assert np.max(np.abs(seg.values - bump_run.initial.values)) < 1e-12


def test_linear_constant_is_invariant():
    traj = integrate_linear(0.5, Segment.constant(1.0), 5.0)
    seg = segment_at(traj, 2.5)
    assert np.max(np.abs(seg.values - 1.0)) < 1e-14
    assert np.max(np.abs(seg.derivatives)) < 1e-14


@pytest.mark.parametrize("a,k", [(2.0, KAPPA_2), (0.5, KAPPA_HALF)])
def test_linear_eigenfunction_propagation(a, k):
    traj = integrate_linear(a, exp_segment(k), 3.0)
    t = np.linspace(0, 3, 301)
    assert np.max(np.abs(traj.eval(t) / np.exp(k * t) - 1.0)) < 1e-6


def test_linear_flow_accepts_kinks(rng):
    traj = integrate_linear(0.5, random_segment(rng), 2.0)
    assert traj.status == COMPLETED


def test_blowup_is_stopped_at_bound():
    model = Model(2.0, DelayFunction.constant())
    traj = integrate(model, make_admissible(model, 1e-4), 200.0, IntegrationOptions(bound=0.5))
    assert traj.status == BLOWUP_STOPPED
    assert traj.end_time < 200.0
    assert norm_c(segment_at(traj, traj.end_time)) >= 0.5


@pytest.mark.parametrize("t,s", [(1.0, 1.0), (2.5, 3.0), (0.5, 5.0)])
def test_semiflow_composition(bump_model_half, t, s):
    phi = make_admissible(bump_model_half, 0.1)
    full = integrate(bump_model_half, phi, t + s)
    restart = integrate(bump_model_half, segment_at(full, t), s)
    assert norm_c1(segment_at(full, t + s) - segment_at(restart, s)) < 1e-6


def test_fourth_order_at_step_midpoints():
    model = Model(0.5, DelayFunction.rational_bump(1.0))
    phi = make_admissible(model, 0.5)
    errs = []
    for dt in (0.04, 0.02, 0.01):
        spots = np.arange(3.0, 6.0 - 1e-9, dt) + dt / 2
        traj = integrate(model, phi, 6.0, IntegrationOptions(dt=dt, residual_tol=np.inf))
        errs.append(max_residual(traj, spots))
    for coarse, fine in zip(errs, errs[1:]):
        assert 8 <= coarse / fine <= 32


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernel not built")
def test_kernels_agree(monkeypatch):
    s = np.linspace(0, 5, 101)
    for delay in (DelayFunction.constant(), DelayFunction.rational_bump(2.0),
                  DelayFunction.user_table(s, 1 / (1 + s ** 2))):
        model = Model(0.7, delay)
        phi = make_admissible(model, 0.2)
        fast = integrate(model, phi, 5.0)
        monkeypatch.setattr(kernels, "integrate_rk4", _rk4py.integrate_rk4)
        slow = integrate(model, phi, 5.0)
        monkeypatch.undo()
        assert np.max(np.abs(fast.xs - slow.xs)) < 1e-14
        assert fast.status == slow.status


def test_csv_columns(bump_run):
    lines = bump_run.to_csv(stride=1.0).splitlines()
    assert lines[0] == "t,x,xprime"
    assert len(lines) == 1 + 202  # header, then t = -1, 0, ..., 200
