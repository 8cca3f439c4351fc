"""JSON run configuration: schema, defaults, validation, CLI overrides.

A run is described by a JSON object with the sections below (all keys
optional except ``scenario``; defaults in parentheses):

    scenario      one of "eigens", "ldos", "dynamics", "shape", "adiabaticity"
    system        eta (10), kappa_t (1), kappa_l (1), kappa_r (1), g (0.1),
                  gamma (0), omega_e_offset (0)
    continuum     n_modes (2001), bandwidth (40), guard_factor (4)
    integration   t_final (120), dt (0.01), snapshot_stride (10),
                  backend (null = auto), auto_dt (true), kappa_int (0)
    schedule      kind ("zero"|"constant"|"linear_ramp"|"sampled"|"designed",
                  default "zero"), value (0), rate (0), samples (null;
                  list of [t, delta] pairs, required for "sampled")
    target        center (50), width (25), p_tot (0.95)
    design        n_samples (1201), x_headroom (0.92), delta_max (null =
                  10*eta), auto_feasible (true)
    sweep         lo (-4), hi (4), steps (401)  [detuning in units of eta]
    pulse         threshold_fraction (0.01), n_points (1001),
                  window (null = scenario default; else [lo, hi])
    adiabaticity  regime ("shaping"), factor (5)

Unknown keys anywhere are rejected with their full path.  Command-line
overrides ("section.key=value", JSON-parsed values) are applied to the
raw dictionary before validation, so they obey the same rules.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .design import GaussianPulseTarget
from .modes import SystemParams
from .schedule import SCHEDULE_KINDS

__all__ = [
    "ConfigError",
    "RunConfig",
    "ContinuumSettings",
    "IntegrationSettings",
    "ScheduleSettings",
    "DesignSettings",
    "SweepSettings",
    "PulseSettings",
    "AdiabaticitySettings",
    "SCENARIOS",
    "parse_config",
    "apply_overrides",
    "config_to_dict",
]

SCENARIOS = ("eigens", "ldos", "dynamics", "shape", "adiabaticity")


class ConfigError(ValueError):
    """Invalid run configuration; the message lists every offending path."""


@dataclass(frozen=True)
class ContinuumSettings:
    n_modes: int = 2001
    bandwidth: float = 40.0
    guard_factor: float = 4.0


@dataclass(frozen=True)
class IntegrationSettings:
    t_final: float = 120.0
    dt: float = 0.01
    snapshot_stride: int = 10
    backend: str | None = None
    auto_dt: bool = True
    kappa_int: float = 0.0


@dataclass(frozen=True)
class ScheduleSettings:
    kind: str = "zero"
    value: float = 0.0
    rate: float = 0.0
    samples: list | None = None


@dataclass(frozen=True)
class DesignSettings:
    n_samples: int = 1201
    x_headroom: float = 0.92
    delta_max: float | None = None
    auto_feasible: bool = True


@dataclass(frozen=True)
class SweepSettings:
    lo: float = -4.0
    hi: float = 4.0
    steps: int = 401


@dataclass(frozen=True)
class PulseSettings:
    threshold_fraction: float = 0.01
    n_points: int = 1001
    window: tuple[float, float] | None = None


@dataclass(frozen=True)
class AdiabaticitySettings:
    regime: str = "shaping"
    factor: float = 5.0


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    system: SystemParams = field(default_factory=SystemParams)
    continuum: ContinuumSettings = field(default_factory=ContinuumSettings)
    integration: IntegrationSettings = field(default_factory=IntegrationSettings)
    schedule: ScheduleSettings = field(default_factory=ScheduleSettings)
    target: GaussianPulseTarget = field(default_factory=GaussianPulseTarget)
    design: DesignSettings = field(default_factory=DesignSettings)
    sweep: SweepSettings = field(default_factory=SweepSettings)
    pulse: PulseSettings = field(default_factory=PulseSettings)
    adiabaticity: AdiabaticitySettings = field(default_factory=AdiabaticitySettings)


def _want_float(raw: Any, path: str, errors: list[str], *, allow_none: bool = False) -> Any:
    if raw is None and allow_none:
        return None
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        errors.append(f"{path}: expected a number, got {raw!r}")
        return None
    if not np.isfinite(raw):
        errors.append(f"{path}: must be finite, got {raw!r}")
        return None
    return float(raw)


def _want_int(raw: Any, path: str, errors: list[str]) -> Any:
    if isinstance(raw, bool) or not isinstance(raw, int):
        errors.append(f"{path}: expected an integer, got {raw!r}")
        return None
    return int(raw)


def _want_bool(raw: Any, path: str, errors: list[str]) -> Any:
    if not isinstance(raw, bool):
        errors.append(f"{path}: expected true/false, got {raw!r}")
        return None
    return raw


def _want_str(raw: Any, path: str, errors: list[str], choices: tuple[str, ...] | None = None,
              *, allow_none: bool = False) -> Any:
    if raw is None and allow_none:
        return None
    if not isinstance(raw, str):
        errors.append(f"{path}: expected a string, got {raw!r}")
        return None
    if choices is not None and raw not in choices:
        errors.append(f"{path}: expected one of {choices}, got {raw!r}")
        return None
    return raw


def _take_section(raw: dict, name: str, keys: tuple[str, ...], errors: list[str]) -> dict:
    section = raw.get(name)
    if section is None:
        return {}
    if not isinstance(section, dict):
        errors.append(f"{name}: expected an object")
        return {}
    for key in section:
        if key not in keys:
            errors.append(f"{name}.{key}: unknown key")
    return section


def _build(
    cls,
    section: dict,
    name: str,
    converters: dict,
    errors: list[str],
):
    kwargs = {}
    for key, convert in converters.items():
        if key in section:
            value = convert(section[key], f"{name}.{key}", errors)
            if value is not None or section[key] is None:
                kwargs[key] = value
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        errors.append(f"{name}: {exc}")
        return cls()


def parse_config(text: str, *, scenario: str | None = None) -> RunConfig:
    """Parse and validate a JSON configuration into a :class:`RunConfig`.

    ``scenario`` (e.g. from the command line) fills a missing "scenario"
    key; if both are present they must agree.  All validation problems
    are collected and raised together as a single :class:`ConfigError`.
    """
    try:
        raw = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"top level must be an object, got {type(raw).__name__}")
    return build_config(raw, scenario=scenario)


def build_config(raw: dict, *, scenario: str | None = None) -> RunConfig:
    """Validate an already-parsed configuration dictionary."""
    errors: list[str] = []

    known_sections = (
        "scenario", "system", "continuum", "integration", "schedule",
        "target", "design", "sweep", "pulse", "adiabaticity",
    )
    for key in raw:
        if key not in known_sections:
            errors.append(f"{key}: unknown key")

    cfg_scenario = raw.get("scenario")
    if cfg_scenario is not None:
        cfg_scenario = _want_str(cfg_scenario, "scenario", errors, SCENARIOS)
    if scenario is not None and cfg_scenario is not None and scenario != cfg_scenario:
        errors.append(
            f"scenario: config says {cfg_scenario!r} but {scenario!r} was requested"
        )
    final_scenario = scenario or cfg_scenario
    if final_scenario is None:
        errors.append("scenario: required (set it in the config or on the command line)")
    elif final_scenario not in SCENARIOS:
        errors.append(f"scenario: expected one of {SCENARIOS}, got {final_scenario!r}")

    system = _build(
        SystemParams,
        _take_section(raw, "system", ("eta", "kappa_t", "kappa_l", "kappa_r", "g", "gamma",
                                      "omega_e_offset"), errors),
        "system",
        {k: _want_float for k in ("eta", "kappa_t", "kappa_l", "kappa_r", "g", "gamma",
                                  "omega_e_offset")},
        errors,
    )
    continuum = _build(
        ContinuumSettings,
        _take_section(raw, "continuum", ("n_modes", "bandwidth", "guard_factor"), errors),
        "continuum",
        {"n_modes": _want_int, "bandwidth": _want_float, "guard_factor": _want_float},
        errors,
    )
    integration = _build(
        IntegrationSettings,
        _take_section(raw, "integration", ("t_final", "dt", "snapshot_stride", "backend",
                                           "auto_dt", "kappa_int"), errors),
        "integration",
        {
            "t_final": _want_float,
            "dt": _want_float,
            "snapshot_stride": _want_int,
            "backend": lambda v, p, e: _want_str(v, p, e, ("compiled", "python"), allow_none=True),
            "auto_dt": _want_bool,
            "kappa_int": _want_float,
        },
        errors,
    )
    schedule = _build(
        ScheduleSettings,
        _take_section(raw, "schedule", ("kind", "value", "rate", "samples"), errors),
        "schedule",
        {
            "kind": lambda v, p, e: _want_str(v, p, e, SCHEDULE_KINDS),
            "value": _want_float,
            "rate": _want_float,
            "samples": _want_samples,
        },
        errors,
    )
    target = _build(
        GaussianPulseTarget,
        _take_section(raw, "target", ("center", "width", "p_tot"), errors),
        "target",
        {"center": _want_float, "width": _want_float, "p_tot": _want_float},
        errors,
    )
    design = _build(
        DesignSettings,
        _take_section(raw, "design", ("n_samples", "x_headroom", "delta_max",
                                      "auto_feasible"), errors),
        "design",
        {
            "n_samples": _want_int,
            "x_headroom": _want_float,
            "delta_max": lambda v, p, e: _want_float(v, p, e, allow_none=True),
            "auto_feasible": _want_bool,
        },
        errors,
    )
    sweep = _build(
        SweepSettings,
        _take_section(raw, "sweep", ("lo", "hi", "steps"), errors),
        "sweep",
        {"lo": _want_float, "hi": _want_float, "steps": _want_int},
        errors,
    )
    pulse = _build(
        PulseSettings,
        _take_section(raw, "pulse", ("threshold_fraction", "n_points", "window"), errors),
        "pulse",
        {
            "threshold_fraction": _want_float,
            "n_points": _want_int,
            "window": _want_window,
        },
        errors,
    )
    adiabaticity = _build(
        AdiabaticitySettings,
        _take_section(raw, "adiabaticity", ("regime", "factor"), errors),
        "adiabaticity",
        {
            "regime": lambda v, p, e: _want_str(v, p, e, ("shaping", "rabi")),
            "factor": _want_float,
        },
        errors,
    )

    _validate_ranges(
        final_scenario, continuum, integration, schedule, design, sweep, pulse,
        adiabaticity, system, errors,
    )

    if errors:
        raise ConfigError("; ".join(errors))
    return RunConfig(
        scenario=final_scenario,
        system=system,
        continuum=continuum,
        integration=integration,
        schedule=schedule,
        target=target,
        design=design,
        sweep=sweep,
        pulse=pulse,
        adiabaticity=adiabaticity,
    )


def _want_samples(raw: Any, path: str, errors: list[str]) -> Any:
    if raw is None:
        return None
    if not isinstance(raw, list) or len(raw) < 2:
        errors.append(f"{path}: expected a list of at least two [t, delta] pairs")
        return None
    cleaned = []
    for i, pair in enumerate(raw):
        if (
            not isinstance(pair, (list, tuple))
            or len(pair) != 2
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in pair)
        ):
            errors.append(f"{path}[{i}]: expected a [t, delta] number pair, got {pair!r}")
            return None
        cleaned.append([float(pair[0]), float(pair[1])])
    times = [p[0] for p in cleaned]
    if any(b <= a for a, b in zip(times, times[1:])):
        errors.append(f"{path}: times must be strictly increasing")
        return None
    return cleaned


def _want_window(raw: Any, path: str, errors: list[str]) -> Any:
    if raw is None:
        return None
    if (
        not isinstance(raw, (list, tuple))
        or len(raw) != 2
        or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in raw)
        or not raw[1] > raw[0]
    ):
        errors.append(f"{path}: expected [lo, hi] with hi > lo, got {raw!r}")
        return None
    return (float(raw[0]), float(raw[1]))


def _validate_ranges(
    scenario, continuum, integration, schedule, design, sweep, pulse, adiabaticity,
    system, errors,
) -> None:
    if continuum.n_modes < 2:
        errors.append(f"continuum.n_modes: must be >= 2, got {continuum.n_modes}")
    if continuum.bandwidth <= 0.0:
        errors.append(f"continuum.bandwidth: must be > 0, got {continuum.bandwidth}")
    if continuum.guard_factor < 0.0:
        errors.append(f"continuum.guard_factor: must be >= 0, got {continuum.guard_factor}")
    if integration.t_final <= 0.0:
        errors.append(f"integration.t_final: must be > 0, got {integration.t_final}")
    if integration.dt <= 0.0:
        errors.append(f"integration.dt: must be > 0, got {integration.dt}")
    if integration.snapshot_stride < 1:
        errors.append(
            f"integration.snapshot_stride: must be >= 1, got {integration.snapshot_stride}"
        )
    if integration.kappa_int < 0.0:
        errors.append(f"integration.kappa_int: must be >= 0, got {integration.kappa_int}")
    if schedule.kind == "sampled" and schedule.samples is None:
        errors.append("schedule.samples: required for kind 'sampled'")
    if design.n_samples < 2:
        errors.append(f"design.n_samples: must be >= 2, got {design.n_samples}")
    if not (0.0 < design.x_headroom < 1.0):
        errors.append(f"design.x_headroom: must be in (0, 1), got {design.x_headroom}")
    if design.delta_max is not None and design.delta_max <= 0.0:
        errors.append(f"design.delta_max: must be > 0, got {design.delta_max}")
    if sweep.steps < 1:
        errors.append(f"sweep.steps: must be >= 1, got {sweep.steps}")
    if not sweep.hi > sweep.lo:
        errors.append(f"sweep: need hi > lo, got [{sweep.lo}, {sweep.hi}]")
    if not (0.0 < pulse.threshold_fraction < 1.0):
        errors.append(
            f"pulse.threshold_fraction: must be in (0, 1), got {pulse.threshold_fraction}"
        )
    if pulse.n_points < 2:
        errors.append(f"pulse.n_points: must be >= 2, got {pulse.n_points}")
    if adiabaticity.factor < 1.0:
        errors.append(f"adiabaticity.factor: must be >= 1, got {adiabaticity.factor}")
    if scenario in ("dynamics", "shape") and system.kappa_t <= 0.0:
        errors.append(
            f"system.kappa_t: must be > 0 for the {scenario} scenario (the target loss "
            "is the output channel)"
        )


def apply_overrides(raw: dict, assignments: list[str]) -> dict:
    """Apply ``section.key=value`` overrides to a raw config dictionary.

    Values are parsed as JSON (so ``true``, ``3.5``, ``[1, 2]`` work) and
    fall back to plain strings.  Intermediate objects are created as
    needed; overriding through a non-object is an error.  Returns a new
    dictionary; the input is not modified.
    """
    out = json.loads(json.dumps(raw))
    for item in assignments:
        key, sep, value_text = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"override {item!r}: expected key.path=value")
        try:
            value = json.loads(value_text)
        except json.JSONDecodeError:
            value = value_text
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            if part not in node or node[part] is None:
                node[part] = {}
            node = node[part]
            if not isinstance(node, dict):
                raise ConfigError(f"override {item!r}: {part} is not an object")
        node[parts[-1]] = value
    return out


def config_to_dict(config: RunConfig) -> dict:
    """Effective configuration as a plain JSON-serializable dictionary."""
    out = {"scenario": config.scenario}
    for name in ("system", "continuum", "integration", "schedule", "target", "design",
                 "sweep", "pulse", "adiabaticity"):
        section = asdict(getattr(config, name))
        for key, value in section.items():
            if isinstance(value, tuple):
                section[key] = list(value)
        out[name] = section
    return out
