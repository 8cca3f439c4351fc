"""Tests for the target profile and the detuning-schedule designer."""

import numpy as np
import pytest
from scipy.integrate import quad

from cavshape import (
    GaussianPulseTarget,
    InfeasibleTargetError,
    SystemParams,
    design_symmetric_schedule,
    detuning_to_fraction,
    fraction_to_detuning,
    required_fraction,
)

PARAMS = SystemParams()  # eta=10, all kappas 1, g=0.1
GAMMA_0 = 2.0 * PARAMS.g**2 / PARAMS.kappa_t


def test_target_validation():
    GaussianPulseTarget(center=50.0, width=25.0, p_tot=0.95)
    with pytest.raises(ValueError):
        GaussianPulseTarget(center=-1.0)
    with pytest.raises(ValueError):
        GaussianPulseTarget(width=0.0)
    with pytest.raises(ValueError):
        GaussianPulseTarget(p_tot=1.0)
    with pytest.raises(ValueError):
        GaussianPulseTarget(p_tot=0.0)


def test_closed_form_integrals_match_quadrature():
    target = GaussianPulseTarget(center=40.0, width=12.0, p_tot=0.6)
    for t in (5.0, 25.0, 40.0, 55.0, 90.0):
        num, _ = quad(target.density, 0.0, t)
        assert target.cumulative(t) == pytest.approx(num, rel=1e-9, abs=1e-12)
        num, _ = quad(lambda u: np.sqrt(target.density(u)), 0.0, t)
        assert target.sqrt_density_integral(t) == pytest.approx(num, rel=1e-9)


def test_density_peak_value():
    target = GaussianPulseTarget(center=50.0, width=25.0, p_tot=0.95)
    peak = 0.95 / (25.0 * np.sqrt(2.0 * np.pi))
    assert target.density(50.0) == pytest.approx(peak, rel=1e-12)
    assert target.density(np.array([50.0])).shape == (1,)


def test_required_fraction_equal_losses_formula():
    # with equal losses the hazard inversion is linear in x
    target = GaussianPulseTarget(center=50.0, width=25.0, p_tot=0.2)
    t = np.linspace(0.0, 120.0, 241)
    hazard = target.density(t) / (1.0 - target.cumulative(t))
    x = required_fraction(target, PARAMS, t)
    np.testing.assert_allclose(x, hazard * PARAMS.kappa_t / (2.0 * PARAMS.g**2), rtol=1e-12)
    assert np.all(x >= 0.0) and np.all(x <= 1.0)


def test_required_fraction_infeasible_default_target():
    # collecting 95 percent through this system needs a hazard above the
    # x = 1 ceiling 2 g**2/kappa_t = 0.02
    target = GaussianPulseTarget()
    with pytest.raises(InfeasibleTargetError, match="ceiling"):
        required_fraction(target, PARAMS, np.linspace(0.0, 120.0, 1201))


def test_required_fraction_asymmetric_matches_closed_form():
    # kappa_l = kappa_r = 1.1: Gamma(x) = 2 g**2 x/(1.1 - 0.1 x) inverts to
    # x = 1.1 Gamma/(2 g**2 + 0.1 Gamma); the bisection must reproduce it
    params = SystemParams(kappa_l=1.1, kappa_r=1.1)
    target = GaussianPulseTarget(center=50.0, width=25.0, p_tot=0.2)
    t = np.linspace(1.0, 110.0, 97)
    hazard = target.density(t) / (1.0 - target.cumulative(t))
    expected = 1.1 * hazard / (2.0 * params.g**2 + 0.1 * hazard)
    np.testing.assert_allclose(required_fraction(target, params, t), expected, rtol=1e-10)


def test_asymmetry_band_enforced():
    params = SystemParams(kappa_l=1.3, kappa_r=1.0)
    with pytest.raises(ValueError, match="band"):
        required_fraction(GaussianPulseTarget(p_tot=0.2), params, 50.0)
    with pytest.raises(ValueError, match="band"):
        design_symmetric_schedule(params, GaussianPulseTarget(p_tot=0.2))
    with pytest.raises(ValueError, match="kappa_t"):
        required_fraction(GaussianPulseTarget(p_tot=0.2), SystemParams(kappa_t=0.0), 50.0)


def test_fraction_detuning_maps():
    # x = 1/3 corresponds to delta = eta
    assert fraction_to_detuning(1.0 / 3.0, 10.0) == pytest.approx(10.0, rel=1e-12)
    assert detuning_to_fraction(10.0, 10.0) == pytest.approx(1.0 / 3.0, rel=1e-12)
    rng = np.random.default_rng(3)
    x = rng.uniform(0.0, 0.99, size=50)
    np.testing.assert_allclose(
        detuning_to_fraction(fraction_to_detuning(x, 7.0), 7.0), x, rtol=1e-12, atol=1e-15
    )
    with pytest.raises(ValueError):
        fraction_to_detuning(1.0, 10.0)
    with pytest.raises(ValueError):
        fraction_to_detuning(-0.1, 10.0)
    with pytest.raises(ValueError):
        fraction_to_detuning(0.5, 0.0)
    with pytest.raises(ValueError):
        detuning_to_fraction(1.0, -2.0)


def test_design_feasible_target_no_adaptation():
    target = GaussianPulseTarget(center=50.0, width=25.0, p_tot=0.3)
    sched = design_symmetric_schedule(PARAMS, target)
    assert sched.kind == "designed"
    assert sched.times[0] == 0.0 and sched.times[-1] == 120.0
    assert not sched.info["adapted"]
    assert sched.info["achieved_p_tot"] == 0.3
    assert sched.info["max_fraction"] < 0.92
    assert np.all(sched.values >= 0.0)


def test_design_adapts_infeasible_target():
    target = GaussianPulseTarget()  # p_tot = 0.95 is out of reach
    with pytest.warns(UserWarning, match="scaled collected total"):
        sched = design_symmetric_schedule(PARAMS, target)
    info = sched.info
    assert info["adapted"]
    assert info["requested_p_tot"] == 0.95
    assert 0.50 < info["achieved_p_tot"] < 0.60
    assert info["max_fraction"] <= 0.92 + 1e-9
    assert info["loss_asymmetry"] == 0.0


def test_design_raises_without_adaptation():
    with pytest.raises(InfeasibleTargetError, match="headroom"):
        design_symmetric_schedule(PARAMS, GaussianPulseTarget(), auto_feasible=False)


def test_design_delta_max_clamp():
    target = GaussianPulseTarget(center=50.0, width=25.0, p_tot=0.3)
    sched = design_symmetric_schedule(PARAMS, target, delta_max=5.0)
    assert np.max(sched.values) <= 5.0 + 1e-12
    assert sched.info["delta_max"] == 5.0


def test_design_marching_matches_closed_form():
    # a 1e-9 loss asymmetry routes through the marching solver; the result
    # must agree with the equal-loss closed form
    target = GaussianPulseTarget(center=50.0, width=25.0, p_tot=0.3)
    closed = design_symmetric_schedule(PARAMS, target)
    nearly = SystemParams(kappa_l=1.0 + 1e-9, kappa_r=1.0 + 1e-9)
    marched = design_symmetric_schedule(nearly, target)
    mask = closed.values > 1e-3
    np.testing.assert_allclose(
        marched.values[mask], closed.values[mask], rtol=2e-3
    )


def test_design_forward_reconstruction():
    # integrate the survival ODE with the designed x(t) and check the
    # emitted density reproduces the target envelope
    params = SystemParams(kappa_l=1.05, kappa_r=1.05)
    target = GaussianPulseTarget(center=50.0, width=25.0, p_tot=0.3)
    sched = design_symmetric_schedule(params, target, n_samples=4801)
    t = sched.times
    x = detuning_to_fraction(sched.values, params.eta)
    kappa_1 = x * params.kappa_t + (1.0 - x) * 0.5 * (params.kappa_l + params.kappa_r)
    gamma_tot = 2.0 * params.g**2 * x / kappa_1
    branching = x * params.kappa_t / kappa_1
    ln_s = -np.concatenate(([0.0], np.cumsum(0.5 * (gamma_tot[1:] + gamma_tot[:-1]) * np.diff(t))))
    emitted = branching * gamma_tot * np.exp(ln_s)
    want = target.density(t)
    mask = want > 0.05 * np.max(want)
    np.testing.assert_allclose(emitted[mask], want[mask], rtol=5e-3)


def test_design_argument_validation():
    target = GaussianPulseTarget(p_tot=0.3)
    with pytest.raises(ValueError, match="window"):
        design_symmetric_schedule(PARAMS, target, window=(10.0, 10.0))
    with pytest.raises(ValueError, match="n_samples"):
        design_symmetric_schedule(PARAMS, target, n_samples=1)
    with pytest.raises(ValueError, match="x_headroom"):
        design_symmetric_schedule(PARAMS, target, x_headroom=1.2)
    with pytest.raises(ValueError, match="delta_max"):
        design_symmetric_schedule(PARAMS, target, delta_max=-1.0)
