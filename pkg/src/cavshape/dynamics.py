"""Single-excitation wavefunction dynamics of emitter + cavities + continuum.

The state is the amplitude vector ``(c_e, c_t, c_l, c_r, c_k[0..N-1])``
over the emitter, the three cavities, and the N continuum modes of a
:class:`~cavshape.continuum.ContinuumGrid`.  Time evolution follows the
amplitude equations documented in ``_kernel_py`` (real antisymmetric
couplings; losses as real amplitude decay rates; the target loss carried
by the mode comb).  With all losses off the couplings are antisymmetric,
so the squared norm is conserved exactly by the continuous equations and
to integrator accuracy by the fixed-step RK4 used here.

Integration uses a compiled kernel when the extension built, otherwise a
numpy fallback with identical semantics; ``backend="python"`` or
``"compiled"`` forces the choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .continuum import ContinuumGrid
from .modes import SystemParams
from .schedule import DetuningSchedule

from . import _kernel_py

try:
    from . import _kernel  # type: ignore[attr-defined]
except ImportError:
    _kernel = None

__all__ = [
    "AmplitudeState",
    "Trajectory",
    "IntegrationInstabilityError",
    "available_backends",
    "default_backend",
    "rhs",
    "integrate",
    "populations",
]

# RK4 is neutrally stable on the imaginary axis only up to |omega|*dt = 2*sqrt(2);
# the norm-cap abort turns a breach into a clean error instead of an overflow.
DEFAULT_NORM_CAP = 1.0 + 1e-4


class IntegrationInstabilityError(RuntimeError):
    """Raised when the integrator norm blows past the stability cap."""


def available_backends() -> tuple[str, ...]:
    if _kernel is not None:
        return ("compiled", "python")
    return ("python",)


def default_backend() -> str:
    return "compiled" if _kernel is not None else "python"


@dataclass(frozen=True)
class AmplitudeState:
    """Amplitudes of one snapshot: emitter, cavities, continuum modes."""

    c_e: complex
    c_t: complex
    c_l: complex
    c_r: complex
    c_k: np.ndarray

    @classmethod
    def from_vector(cls, y: np.ndarray) -> "AmplitudeState":
        return cls(c_e=complex(y[0]), c_t=complex(y[1]), c_l=complex(y[2]),
                   c_r=complex(y[3]), c_k=np.asarray(y[4:], dtype=complex))

    def as_vector(self) -> np.ndarray:
        return np.concatenate(([self.c_e, self.c_t, self.c_l, self.c_r], self.c_k))

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_vector()))


@dataclass(frozen=True)
class Trajectory:
    """Snapshots of an integration run.

    ``states[i]`` is the full amplitude vector at ``times[i]``;
    ``step_norms[m]`` is the state norm after step ``m`` (every step, not
    just snapshots).  ``dt`` and ``t_final`` are the values actually used.
    """

    times: np.ndarray
    states: np.ndarray
    step_norms: np.ndarray
    dt: float
    t_final: float
    grid: ContinuumGrid
    params: SystemParams
    backend: str = "python"
    meta: dict = field(default_factory=dict)

    def state_at(self, index: int) -> AmplitudeState:
        return AmplitudeState.from_vector(self.states[index])

    @property
    def final_state(self) -> AmplitudeState:
        return self.state_at(-1)


def rhs(
    state: AmplitudeState,
    params: SystemParams,
    grid: ContinuumGrid,
    delta: float,
    *,
    kappa_int: float = 0.0,
) -> AmplitudeState:
    """Time derivative of the amplitude vector at control detuning ``delta``.

    Reference implementation of the equations the kernels integrate; used
    for property checks, not in the integration loop.
    """
    d_e = params.g * state.c_t - (params.gamma + 1j * params.omega_e_offset) * state.c_e
    d_t = (
        -params.g * state.c_e
        - params.eta * (state.c_l + state.c_r)
        + grid.kappa_prime * state.c_k.sum()
        - kappa_int * state.c_t
    )
    d_l = params.eta * state.c_t - (1j * delta + params.kappa_l) * state.c_l
    d_r = params.eta * state.c_t + (1j * delta - params.kappa_r) * state.c_r
    d_k = -1j * grid.detunings * state.c_k - grid.kappa_prime * state.c_t
    return AmplitudeState(c_e=d_e, c_t=d_t, c_l=d_l, c_r=d_r, c_k=d_k)


def _snapshot_steps(n_steps: int, stride: int) -> np.ndarray:
    steps = np.arange(0, n_steps + 1, stride, dtype=np.int64)
    if steps[-1] != n_steps:
        steps = np.append(steps, np.int64(n_steps))
    return steps


def integrate(
    params: SystemParams,
    grid: ContinuumGrid,
    schedule: DetuningSchedule,
    *,
    t_final: float = 120.0,
    dt: float = 0.01,
    snapshot_stride: int = 10,
    initial: AmplitudeState | None = None,
    kappa_int: float = 0.0,
    backend: str | None = None,
    norm_cap: float = DEFAULT_NORM_CAP,
) -> Trajectory:
    """Integrate the amplitude equations from t = 0 to ``t_final``.

    The default initial state is a fully excited emitter with everything
    else empty.  The control detuning is presampled from ``schedule`` at
    every half step, so sampled schedules cost one interpolation pass up
    front.  The step count is ``round(t_final/dt)``; ``t_final`` is then
    adjusted to an exact multiple of ``dt`` (recorded on the trajectory).

    Raises :class:`IntegrationInstabilityError` when the state norm
    exceeds ``norm_cap`` times the initial norm: physical runs never gain
    norm, so a breach means ``dt`` is too coarse for the fastest
    frequency present.
    """
    if params.kappa_t <= 0.0:
        raise ValueError("dynamics requires kappa_t > 0 (the continuum carries the target loss)")
    if abs(grid.kappa_t - params.kappa_t) > 1e-12 * max(params.kappa_t, 1.0):
        raise ValueError(
            f"grid was built for kappa_t={grid.kappa_t}, params have kappa_t={params.kappa_t}"
        )
    if dt <= 0.0 or not np.isfinite(dt):
        raise ValueError(f"dt must be positive and finite, got {dt}")
    if t_final <= 0.0 or not np.isfinite(t_final):
        raise ValueError(f"t_final must be positive and finite, got {t_final}")
    if snapshot_stride < 1:
        raise ValueError(f"snapshot_stride must be >= 1, got {snapshot_stride}")
    if kappa_int < 0.0:
        raise ValueError(f"kappa_int must be >= 0, got {kappa_int}")

    n_steps = max(1, round(t_final / dt))
    t_final_eff = n_steps * dt

    if initial is None:
        y0 = np.zeros(4 + grid.n_modes, dtype=complex)
        y0[0] = 1.0
    else:
        y0 = initial.as_vector()
        if y0.shape[0] != 4 + grid.n_modes:
            raise ValueError(
                f"initial state has {y0.shape[0] - 4} continuum modes, grid has {grid.n_modes}"
            )

    if backend is None:
        backend = default_backend()
    if backend == "compiled":
        if _kernel is None:
            raise ValueError("compiled backend requested but the extension is not built")
        kernel = _kernel
    elif backend == "python":
        kernel = _kernel_py
    else:
        raise ValueError(f"unknown backend {backend!r}; expected 'compiled' or 'python'")

    half_times = 0.5 * dt * np.arange(2 * n_steps + 1)
    delta_half = np.ascontiguousarray(schedule.sample(half_times), dtype=float)
    snap_steps = _snapshot_steps(n_steps, snapshot_stride)

    snapshots, norms, fail_step = kernel.run_rk4(
        y0,
        grid.detunings,
        delta_half,
        params.g,
        params.gamma,
        params.omega_e_offset,
        params.eta,
        params.kappa_l,
        params.kappa_r,
        kappa_int,
        grid.kappa_prime,
        dt,
        n_steps,
        snap_steps,
        norm_cap * float(np.linalg.norm(y0)),
    )
    if fail_step >= 0:
        omega_hint = 2.0 * math.sqrt(2.0) / dt
        raise IntegrationInstabilityError(
            f"norm exceeded {norm_cap} at step {fail_step} (t = {fail_step * dt:.6g}); "
            f"dt = {dt} only resolves frequencies below ~{omega_hint:.3g}, reduce dt"
        )

    return Trajectory(
        times=snap_steps * dt,
        states=snapshots,
        step_norms=norms,
        dt=dt,
        t_final=t_final_eff,
        grid=grid,
        params=params,
        backend=backend,
    )


def populations(traj: Trajectory) -> dict[str, np.ndarray]:
    """Per-component populations |c|**2 at each snapshot time.

    ``p_cont`` sums all continuum modes; ``norm_sq`` is their total plus
    the discrete components (1 at all times for a lossless run).
    """
    s = traj.states
    out = {
        "t": traj.times.copy(),
        "p_e": np.abs(s[:, 0]) ** 2,
        "p_t": np.abs(s[:, 1]) ** 2,
        "p_l": np.abs(s[:, 2]) ** 2,
        "p_r": np.abs(s[:, 3]) ** 2,
        "p_cont": np.sum(np.abs(s[:, 4:]) ** 2, axis=1),
    }
    out["norm_sq"] = out["p_e"] + out["p_t"] + out["p_l"] + out["p_r"] + out["p_cont"]
    return out
