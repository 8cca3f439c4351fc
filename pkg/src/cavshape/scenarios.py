"""Scenario runners: one callable per supported study, file outputs, manifest.

Every scenario writes its tables as CSV (see :mod:`cavshape.csvio`) plus a
``manifest.json`` recording the effective configuration, derived grid
quantities, headline metrics, warnings, and wall-clock time.  Outputs are
deterministic: identical configurations produce byte-identical CSV files
(manifest timing naturally varies).  On any failure the partial outputs
are removed so a results directory is either complete or absent.

Scenarios:

* ``eigens``        sweep the control detuning, eigenvalues + mode weights
* ``ldos``          dark-mode target weight and emission-rate ratio sweep
* ``dynamics``      one integration run with a configured schedule
* ``shape``         design a schedule for the Gaussian target, run it,
                    score the emitted pulse
* ``adiabaticity``  rate-window check of a schedule, no integration
"""

from __future__ import annotations

import json
import time
import warnings as _warnings
from pathlib import Path

import numpy as np

from ._version import __version__
from .config import RunConfig, config_to_dict
from .continuum import build_continuum
from .csvio import write_csv
from .design import design_symmetric_schedule
from .dynamics import Trajectory, default_backend, integrate, populations
from .modes import build_cavity_hamiltonian, ldos_ratio, numeric_eigensystem, se_rate_ratio
from .pulse import extract_output_pulse, fit_gaussian, overlap_fidelity, phase_profile, time_invert
from .schedule import DetuningSchedule, check_adiabaticity, make_constant, make_ramp, make_sampled, make_zero

__all__ = ["run_scenario", "stable_dt"]


def stable_dt(config: RunConfig, schedule: DetuningSchedule) -> float:
    """Step size resolving the fastest frequency of the configured run.

    The stiffest scales are the band edge (bandwidth/2) and the hybridized
    cavity splitting sqrt(delta_max**2 + 2*eta**2).  RK4 is stable on the
    imaginary axis up to omega*dt = 2*sqrt(2); one radian per step
    (omega*dt = 1) leaves accuracy headroom on top of stability.
    """
    delta_max = schedule.max_abs_detuning(config.integration.t_final)
    omega_max = max(
        0.5 * config.continuum.bandwidth,
        float(np.sqrt(delta_max**2 + 2.0 * config.system.eta**2)),
    )
    return 1.0 / omega_max


def _build_schedule(config: RunConfig, warn_sink: list[str]) -> DetuningSchedule:
    s = config.schedule
    if s.kind == "zero":
        return make_zero()
    if s.kind == "constant":
        return make_constant(s.value)
    if s.kind == "linear_ramp":
        return make_ramp(s.rate)
    if s.kind == "sampled":
        arr = np.asarray(s.samples, dtype=float)
        return make_sampled(arr[:, 0], arr[:, 1])
    return _design_schedule(config, warn_sink)


def _design_schedule(config: RunConfig, warn_sink: list[str]) -> DetuningSchedule:
    d = config.design
    with _warnings.catch_warnings(record=True) as caught:
        _warnings.simplefilter("always")
        schedule = design_symmetric_schedule(
            config.system,
            config.target,
            window=(0.0, config.integration.t_final),
            n_samples=d.n_samples,
            x_headroom=d.x_headroom,
            delta_max=d.delta_max,
            auto_feasible=d.auto_feasible,
        )
    warn_sink.extend(str(w.message) for w in caught)
    return schedule


def _integrate_for(
    config: RunConfig, schedule: DetuningSchedule, derived: dict
) -> Trajectory:
    grid = build_continuum(
        config.system.kappa_t,
        config.continuum.n_modes,
        config.continuum.bandwidth,
        guard_factor=config.continuum.guard_factor,
    )
    integ = config.integration
    dt_used = integ.dt
    if integ.auto_dt:
        dt_used = min(dt_used, stable_dt(config, schedule))
    # keep the snapshot cadence in time when auto_dt tightens the step
    stride_used = integ.snapshot_stride * max(1, round(integ.dt / dt_used))
    traj = integrate(
        config.system,
        grid,
        schedule,
        t_final=integ.t_final,
        dt=dt_used,
        snapshot_stride=stride_used,
        kappa_int=integ.kappa_int,
        backend=integ.backend,
    )
    derived.update(
        kappa_prime=grid.kappa_prime,
        mode_spacing=grid.spacing,
        recurrence_time=grid.recurrence_time,
        dt_used=dt_used,
        snapshot_stride_used=stride_used,
        n_steps=round(traj.t_final / traj.dt),
        t_final_used=traj.t_final,
    )
    return traj


def _write_populations(traj: Trajectory, csv_writer) -> dict:
    pops = populations(traj)
    csv_writer(
        "populations.csv",
        ["t", "p_e", "p_t", "p_l", "p_r", "p_cont", "norm_sq"],
        [pops["t"], pops["p_e"], pops["p_t"], pops["p_l"], pops["p_r"],
         pops["p_cont"], pops["norm_sq"]],
    )
    return pops


def _final_population_metrics(pops: dict) -> dict:
    return {
        "final_p_e": float(pops["p_e"][-1]),
        "final_p_t": float(pops["p_t"][-1]),
        "final_p_l": float(pops["p_l"][-1]),
        "final_p_r": float(pops["p_r"][-1]),
        "final_p_cont": float(pops["p_cont"][-1]),
        "final_norm_sq": float(pops["norm_sq"][-1]),
    }


def _run_eigens(config: RunConfig, csv_writer, derived: dict, warns: list[str]) -> dict:
    sw = config.sweep
    params = config.system
    deltas = np.linspace(sw.lo, sw.hi, sw.steps) * params.eta
    cols = {name: np.empty(sw.steps) for name in (
        "delta_over_eta",
        "omega_dark_re", "omega_dark_im",
        "omega_up_re", "omega_up_im",
        "omega_down_re", "omega_down_im",
        "frac_dark", "frac_up", "frac_down",
        "loss_dark", "loss_up", "loss_down",
    )}
    for i, delta in enumerate(deltas):
        es = numeric_eigensystem(build_cavity_hamiltonian(params, delta))
        cols["delta_over_eta"][i] = delta / params.eta
        for j, tag in enumerate(("dark", "up", "down")):
            cols[f"omega_{tag}_re"][i] = es.omegas[j].real
            cols[f"omega_{tag}_im"][i] = es.omegas[j].imag
            cols[f"frac_{tag}"][i] = es.target_fractions[j]
            cols[f"loss_{tag}"][i] = es.effective_losses[j]
    csv_writer("eigens.csv", list(cols), list(cols.values()))

    metrics = {
        "max_abs_dark_re": float(np.max(np.abs(cols["omega_dark_re"]))),
        "frac_dark_min": float(np.min(cols["frac_dark"])),
        "frac_dark_max": float(np.max(cols["frac_dark"])),
    }
    lossless = params.kappa_l == params.kappa_r == params.kappa_t == 0.0
    if lossless:
        splitting = np.sqrt(2.0 * params.eta**2 + deltas**2)
        mismatch = np.maximum(
            np.abs(cols["omega_up_re"] - splitting),
            np.abs(cols["omega_down_re"] + splitting),
        )
        mismatch = np.maximum(mismatch, np.abs(cols["omega_dark_re"]))
        metrics["max_analytic_mismatch"] = float(np.max(mismatch))
    return metrics


def _run_ldos(config: RunConfig, csv_writer, derived: dict, warns: list[str]) -> dict:
    sw = config.sweep
    params = config.system
    rel = np.linspace(sw.lo, sw.hi, sw.steps)
    ratios = np.array([ldos_ratio(params.eta, d * params.eta) for d in rel])
    se = np.empty_like(ratios)
    for i, d in enumerate(rel):
        try:
            se[i] = se_rate_ratio(params, d * params.eta)
        except ZeroDivisionError:
            se[i] = np.nan
    csv_writer("ldos.csv", ["delta_over_eta", "ldos_ratio", "se_rate_ratio"],
               [rel, ratios, se])

    metrics = {
        "ldos_at_zero": float(ldos_ratio(params.eta, 0.0)),
        "ldos_at_eta": float(ldos_ratio(params.eta, params.eta)),
        "half_weight_delta_over_eta": float(np.sqrt(2.0)),
    }
    try:
        metrics["se_ratio_at_eta"] = float(se_rate_ratio(params, params.eta))
    except ZeroDivisionError:
        metrics["se_ratio_at_eta"] = float("nan")
    return metrics


def _run_dynamics(config: RunConfig, csv_writer, derived: dict, warns: list[str]) -> dict:
    schedule = _build_schedule(config, warns)
    traj = _integrate_for(config, schedule, derived)
    pops = _write_populations(traj, csv_writer)

    window = config.pulse.window or (0.0, traj.t_final)
    t_grid = np.linspace(window[0], window[1], config.pulse.n_points)
    wf = extract_output_pulse(traj.states[-1, 4:], traj.grid, t_grid, traj.t_final)
    csv_writer("pulse.csv", ["t", "f_re", "f_im", "intensity"],
               [wf.times, wf.amplitudes.real, wf.amplitudes.imag,
                np.abs(wf.amplitudes) ** 2])

    if schedule.kind == "constant":
        derived["delta_constant"] = schedule.value
        derived["delta_constant_over_eta"] = schedule.value / config.system.eta
    derived["backend"] = traj.backend
    derived["pulse_window"] = [float(window[0]), float(window[1])]

    metrics = _final_population_metrics(pops)
    metrics["pulse_energy"] = wf.energy
    metrics["max_step_norm"] = float(np.max(traj.step_norms))
    metrics["min_step_norm"] = float(np.min(traj.step_norms))
    return metrics


def _run_shape(config: RunConfig, csv_writer, derived: dict, warns: list[str]) -> dict:
    schedule = _design_schedule(config, warns)
    report = check_adiabaticity(
        schedule, config.system,
        regime=config.adiabaticity.regime, factor=config.adiabaticity.factor,
    )
    if not report.passed:
        warns.append(
            f"designed schedule fails the {report.regime} rate window: "
            f"margins {report.margin_low:.3g} / {report.margin_high:.3g} "
            f"(need >= {report.factor})"
        )

    traj = _integrate_for(config, schedule, derived)
    pops = _write_populations(traj, csv_writer)
    csv_writer("schedule.csv", ["t", "delta"], [schedule.times, schedule.values])

    # score symmetry about the target center: the window must be centered
    # on it, so time inversion maps the ideal pulse onto itself
    window = config.pulse.window or (0.0, min(2.0 * config.target.center, traj.t_final))
    t_grid = np.linspace(window[0], window[1], config.pulse.n_points)
    wf = extract_output_pulse(traj.states[-1, 4:], traj.grid, t_grid, traj.t_final)
    csv_writer("pulse.csv", ["t", "f_re", "f_im", "intensity"],
               [wf.times, wf.amplitudes.real, wf.amplitudes.imag,
                np.abs(wf.amplitudes) ** 2])

    fit = fit_gaussian(wf)
    fidelity = overlap_fidelity(wf, time_invert(wf),
                                threshold_fraction=config.pulse.threshold_fraction)
    phase = phase_profile(wf, config.pulse.threshold_fraction)
    csv_writer("phase.csv", ["t", "phase"], [phase.times, phase.phase])

    derived["backend"] = traj.backend
    derived["pulse_window"] = [float(window[0]), float(window[1])]
    derived["design"] = {k: v for k, v in schedule.info.items() if k != "window"}
    derived["design_window"] = list(schedule.info["window"])

    metrics = _final_population_metrics(pops)
    metrics.update(
        fidelity=fidelity.fidelity,
        phase_flatness=fidelity.phase_flatness,
        fit_amplitude=fit.amplitude,
        fit_center=fit.center,
        fit_width=fit.width,
        fit_r_squared=fit.r_squared,
        pulse_energy=wf.energy,
        requested_p_tot=schedule.info["requested_p_tot"],
        achieved_p_tot=schedule.info["achieved_p_tot"],
        design_adapted=schedule.info["adapted"],
        max_fraction=schedule.info["max_fraction"],
        beta_max=report.beta_max,
        margin_low=report.margin_low,
        margin_high=report.margin_high,
        adiabatic_pass=report.passed,
    )
    return metrics


def _run_adiabaticity(config: RunConfig, csv_writer, derived: dict, warns: list[str]) -> dict:
    schedule = _build_schedule(config, warns)
    report = check_adiabaticity(
        schedule, config.system,
        regime=config.adiabaticity.regime, factor=config.adiabaticity.factor,
    )
    if schedule.times is not None:
        t = schedule.times
    else:
        t = np.linspace(0.0, config.integration.t_final, config.pulse.n_points)
    csv_writer("schedule.csv", ["t", "delta"], [t, np.atleast_1d(schedule.sample(t))])

    metrics = {
        "beta_max": report.beta_max,
        "sqrt_beta": report.sqrt_beta,
        "slow_scale": report.slow_scale,
        "fast_scale": report.fast_scale,
        "margin_low": report.margin_low,
        "margin_high": report.margin_high,
        "factor": report.factor,
        "passed": report.passed,
    }
    if report.loss_ok is not None:
        metrics["loss_ok"] = report.loss_ok
    return metrics


_RUNNERS = {
    "eigens": _run_eigens,
    "ldos": _run_ldos,
    "dynamics": _run_dynamics,
    "shape": _run_shape,
    "adiabaticity": _run_adiabaticity,
}


def run_scenario(config: RunConfig, out_dir: Path | str) -> dict:
    """Run ``config.scenario`` and write its artifacts into ``out_dir``.

    Returns the manifest dictionary (also written as ``manifest.json``).
    On failure every file this call created is removed before the
    exception propagates.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    created: list[Path] = []

    def csv_writer(name: str, header: list[str], columns: list) -> None:
        path = out / name
        write_csv(path, header, columns)
        created.append(path)

    started = time.perf_counter()
    warns: list[str] = []
    derived: dict = {}
    try:
        runner = _RUNNERS[config.scenario]
        metrics = runner(config, csv_writer, derived, warns)
        manifest = {
            "scenario": config.scenario,
            "version": __version__,
            "backend": derived.get("backend", default_backend()),
            "config": config_to_dict(config),
            "derived": derived,
            "metrics": metrics,
            "warnings": warns,
            "artifacts": sorted(p.name for p in created),
            "wall_clock_seconds": time.perf_counter() - started,
        }
        manifest_path = out / "manifest.json"
        created.append(manifest_path)
        manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return manifest
    except BaseException:
        for path in created:
            path.unlink(missing_ok=True)
        raise
