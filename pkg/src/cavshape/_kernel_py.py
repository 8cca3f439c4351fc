"""Pure-numpy RK4 kernel for the amplitude equations.

Fallback used when the compiled extension is unavailable; the compiled
kernel in ``_kernel.pyx`` mirrors this function exactly (same signature,
same snapshot and norm semantics, bitwise-compatible step arithmetic up
to floating-point reassociation).

State layout: ``y = [c_e, c_t, c_l, c_r, c_k[0], ..., c_k[N-1]]``.

Amplitude equations (all couplings real, rates in amplitude convention):

    dc_e = g*c_t - gamma*c_e - 1j*omega_e*c_e
    dc_t = -g*c_e - eta*(c_l + c_r) + kappa_prime*sum(c_k) - kappa_int*c_t
    dc_l = eta*c_t - 1j*delta(t)*c_l - kappa_l*c_l
    dc_r = eta*c_t + 1j*delta(t)*c_r - kappa_r*c_r
    dc_k = -1j*detuning_k*c_k - kappa_prime*c_t

The target cavity has no explicit -kappa_t*c_t term: its loss is carried
entirely by the mode comb through kappa_prime (kappa_int is a separate,
optional intrinsic loss).  ``delta_half`` holds the control detuning
sampled at every half step, ``delta_half[2*m + j]`` for step ``m`` and
substep offset ``j`` in {0, 1, 2}, so a run of ``n_steps`` needs
``2*n_steps + 1`` samples.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def run_rk4(
    y0: np.ndarray,
    detunings: np.ndarray,
    delta_half: np.ndarray,
    g: float,
    gamma: float,
    omega_e: float,
    eta: float,
    kappa_l: float,
    kappa_r: float,
    kappa_int: float,
    kappa_prime: float,
    dt: float,
    n_steps: int,
    snap_steps: np.ndarray,
    norm_cap: float,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Fixed-step RK4 over ``n_steps`` steps of size ``dt``.

    Records the full state at each step index in ``snap_steps`` (sorted,
    starting at 0) and the state norm after every step.  Aborts once the
    norm exceeds ``norm_cap`` (or goes non-finite); the return value is
    ``(snapshots, norms, fail_step)`` with ``fail_step = -1`` on success,
    else the first offending step.  On abort the remaining snapshot rows
    and norm entries are left as zeros/NaN for the caller to discard.
    """
    y = np.array(y0, dtype=complex)
    n = y.shape[0]
    rot = -1j * np.asarray(detunings)
    ce_damp = gamma + 1j * omega_e

    def rhs(state: np.ndarray, delta: float) -> np.ndarray:
        d = np.empty_like(state)
        d[0] = g * state[1] - ce_damp * state[0]
        d[1] = (
            -g * state[0]
            - eta * (state[2] + state[3])
            + kappa_prime * state[4:].sum()
            - kappa_int * state[1]
        )
        d[2] = eta * state[1] - (1j * delta + kappa_l) * state[2]
        d[3] = eta * state[1] + (1j * delta - kappa_r) * state[3]
        d[4:] = rot * state[4:] - kappa_prime * state[1]
        return d

    snapshots = np.zeros((len(snap_steps), n), dtype=complex)
    norms = np.full(n_steps + 1, np.nan)
    norms[0] = np.linalg.norm(y)
    next_snap = 0
    if next_snap < len(snap_steps) and snap_steps[next_snap] == 0:
        snapshots[next_snap] = y
        next_snap += 1

    sixth = dt / 6.0
    half = dt / 2.0
    for m in range(n_steps):
        d0 = delta_half[2 * m]
        d1 = delta_half[2 * m + 1]
        d2 = delta_half[2 * m + 2]
        k1 = rhs(y, d0)
        k2 = rhs(y + half * k1, d1)
        k3 = rhs(y + half * k2, d1)
        k4 = rhs(y + dt * k3, d2)
        y += sixth * (k1 + 2.0 * (k2 + k3) + k4)

        norm = np.linalg.norm(y)
        norms[m + 1] = norm
        if not norm <= norm_cap:
            return snapshots, norms, m + 1
        if next_snap < len(snap_steps) and snap_steps[next_snap] == m + 1:
            snapshots[next_snap] = y
            next_snap += 1

    return snapshots, norms, -1
