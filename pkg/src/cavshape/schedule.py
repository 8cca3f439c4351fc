"""Control-detuning schedules delta(t) and adiabaticity checks.

The symmetric detuning of the outer cavities is the single time-dependent
control.  Schedules come in four kinds:

* ``zero``        delta(t) = 0
* ``constant``    delta(t) = value
* ``linear_ramp`` delta(t) = rate * t
* ``sampled``     piecewise-cubic interpolation through (times, values)
                  with clamped ends (zero slope at both endpoints); also
                  used by designed schedules, which carry provenance in
                  ``info``

Outside a sampled schedule's time range the end values are held constant,
so presampling a longer run than the design window is safe.

Changing delta moves population between supermodes; the move is adiabatic
when the sweep rate beta = |d delta/dt| sits between the slow and fast
scales of the intended regime:

* ``shaping``  2*g**2/kappa_t << sqrt(beta) << eta
  (slow: emitter decay through the dark mode; fast: mode splitting)
* ``rabi``     g << sqrt(beta) << eta, additionally kappa_t < g
  (slow: vacuum Rabi frequency, which must also beat the loss)

:func:`check_adiabaticity` turns "<<" into a margin factor (default 5x).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.interpolate import CubicSpline

from .modes import SystemParams

__all__ = [
    "DetuningSchedule",
    "AdiabaticityReport",
    "make_zero",
    "make_constant",
    "make_ramp",
    "make_sampled",
    "schedule_to_csv",
    "schedule_from_csv",
    "check_adiabaticity",
]

SCHEDULE_KINDS = ("zero", "constant", "linear_ramp", "sampled", "designed")


@dataclass
class DetuningSchedule:
    """A detuning waveform delta(t); build via the ``make_*`` factories."""

    kind: str
    value: float = 0.0
    rate: float = 0.0
    times: np.ndarray | None = None
    values: np.ndarray | None = None
    info: dict = field(default_factory=dict)
    _spline: CubicSpline | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}; expected one of {SCHEDULE_KINDS}")
        if self.kind in ("sampled", "designed"):
            if self.times is None or self.values is None:
                raise ValueError(f"{self.kind} schedule needs times and values")
            t = np.asarray(self.times, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if t.ndim != 1 or t.shape != v.shape or t.size < 2:
                raise ValueError("times and values must be equal-length 1d arrays (>= 2 points)")
            if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
                raise ValueError("times and values must be finite")
            if np.any(np.diff(t) <= 0.0):
                raise ValueError("times must be strictly increasing")
            self.times = t
            self.values = v
            # clamped ends: zero slope outside the samples, so held end
            # values continue smoothly
            self._spline = CubicSpline(t, v, bc_type="clamped")
        else:
            if not np.isfinite(self.value) or not np.isfinite(self.rate):
                raise ValueError("value and rate must be finite")

    def sample(self, t: np.ndarray | float) -> np.ndarray | float:
        """Evaluate delta at time(s) ``t`` (end values held outside range)."""
        t = np.asarray(t, dtype=float)
        if self.kind == "zero":
            out = np.zeros_like(t)
        elif self.kind == "constant":
            out = np.full_like(t, self.value)
        elif self.kind == "linear_ramp":
            out = self.rate * t
        else:
            clipped = np.clip(t, self.times[0], self.times[-1])
            out = self._spline(clipped)
        return out if out.ndim else float(out)

    def max_sweep_rate(self) -> float:
        """max |d delta/dt|: exact for analytic kinds, on the sample grid otherwise."""
        if self.kind in ("zero", "constant"):
            return 0.0
        if self.kind == "linear_ramp":
            return abs(self.rate)
        return float(np.max(np.abs(np.gradient(self.values, self.times))))

    def max_abs_detuning(self, t_final: float | None = None) -> float:
        """Largest |delta| the schedule reaches on [0, t_final] (or its samples)."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return abs(self.value)
        if self.kind == "linear_ramp":
            if t_final is None:
                raise ValueError("linear_ramp needs t_final to bound |delta|")
            return abs(self.rate) * t_final
        return float(np.max(np.abs(self.values)))


def make_zero() -> DetuningSchedule:
    return DetuningSchedule(kind="zero")


def make_constant(value: float) -> DetuningSchedule:
    return DetuningSchedule(kind="constant", value=value)


def make_ramp(rate: float) -> DetuningSchedule:
    return DetuningSchedule(kind="linear_ramp", rate=rate)


def make_sampled(
    times: Iterable[float], values: Iterable[float], info: dict | None = None
) -> DetuningSchedule:
    return DetuningSchedule(
        kind="sampled",
        times=np.asarray(list(times), dtype=float),
        values=np.asarray(list(values), dtype=float),
        info=dict(info or {}),
    )


def schedule_to_csv(schedule: DetuningSchedule, times: np.ndarray | None = None) -> str:
    """Serialize as a two-column table ``t,delta`` (CRLF rows, 17 sig digits).

    Analytic kinds need an explicit time grid; sampled kinds default to
    their own sample points so the round trip is lossless at the nodes.
    """
    if times is None:
        if schedule.times is None:
            raise ValueError("analytic schedules need an explicit time grid to serialize")
        # write the stored samples directly: spline evaluation at its own
        # nodes can differ by an ulp, and the round trip must be exact
        times, values = schedule.times, schedule.values
    else:
        values = np.atleast_1d(schedule.sample(times))
    buf = io.StringIO()
    buf.write("t,delta\r\n")
    for t, v in zip(np.atleast_1d(times), values):
        buf.write(f"{t:.17g},{v:.17g}\r\n")
    return buf.getvalue()


def schedule_from_csv(text: str) -> DetuningSchedule:
    """Parse the :func:`schedule_to_csv` format into a sampled schedule."""
    lines = [ln for ln in text.replace("\r\n", "\n").split("\n") if ln.strip()]
    if not lines or lines[0].split(",")[:2] != ["t", "delta"]:
        raise ValueError("expected header 't,delta'")
    times, values = [], []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 2:
            raise ValueError(f"expected two columns, got {ln!r}")
        times.append(float(parts[0]))
        values.append(float(parts[1]))
    return make_sampled(times, values)


@dataclass(frozen=True)
class AdiabaticityReport:
    """Placement of sqrt(beta_max) inside a regime's rate window.

    ``margin_low = sqrt(beta_max)/slow_scale`` and
    ``margin_high = fast_scale/sqrt(beta_max)``; both must be at least
    ``factor`` to pass.  ``loss_ok`` carries the extra kappa_t < g
    condition of the rabi regime (None for shaping).
    """

    regime: str
    beta_max: float
    sqrt_beta: float
    slow_scale: float
    fast_scale: float
    margin_low: float
    margin_high: float
    factor: float
    loss_ok: bool | None
    passed: bool


def check_adiabaticity(
    schedule: DetuningSchedule,
    params: SystemParams,
    *,
    regime: str = "shaping",
    factor: float = 5.0,
) -> AdiabaticityReport:
    """Check the sweep-rate window for ``regime`` ("shaping" or "rabi")."""
    if regime not in ("shaping", "rabi"):
        raise ValueError(f"unknown regime {regime!r}; expected 'shaping' or 'rabi'")
    if factor < 1.0:
        raise ValueError(f"factor must be >= 1, got {factor}")

    beta = schedule.max_sweep_rate()
    mid = float(np.sqrt(beta))
    if regime == "shaping":
        if params.kappa_t <= 0.0:
            raise ValueError("shaping regime needs kappa_t > 0 (slow scale is 2 g**2/kappa_t)")
        slow = 2.0 * params.g**2 / params.kappa_t
        loss_ok = None
    else:
        slow = params.g
        loss_ok = params.kappa_t < params.g
    fast = params.eta

    margin_low = mid / slow if slow > 0.0 else np.inf
    margin_high = fast / mid if mid > 0.0 else np.inf
    passed = margin_low >= factor and margin_high >= factor and (loss_ok is not False)
    return AdiabaticityReport(
        regime=regime,
        beta_max=beta,
        sqrt_beta=mid,
        slow_scale=slow,
        fast_scale=fast,
        margin_low=float(margin_low),
        margin_high=float(margin_high),
        factor=factor,
        loss_ok=loss_ok,
        passed=passed,
    )
