"""Benchmark the compiled RK4 kernel against the numpy fallback.

Times the shaped-emission workload (designed detuning schedule, 2001
continuum modes, 12000 fixed steps) on every available backend, best of
``--repeats`` runs, and cross-checks that the backends produce the same
final state.

    python3 benchmarks/benchmark_backends.py [--repeats 3] [--n-modes 2001]
"""

from __future__ import annotations

import argparse
import time
import warnings

import numpy as np

from cavshape import (
    GaussianPulseTarget,
    SystemParams,
    available_backends,
    build_continuum,
    design_symmetric_schedule,
    integrate,
)


def build_problem(n_modes: int):
    params = SystemParams()
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always")
        schedule = design_symmetric_schedule(
            params, GaussianPulseTarget(), window=(0.0, 120.0)
        )
    grid = build_continuum(params.kappa_t, n_modes, 40.0)
    return params, grid, schedule


def time_backend(backend: str, params, grid, schedule, repeats: int):
    best = np.inf
    traj = None
    for _ in range(repeats):
        started = time.perf_counter()
        traj = integrate(
            params,
            grid,
            schedule,
            t_final=120.0,
            dt=0.01,
            snapshot_stride=12000,
            backend=backend,
        )
        best = min(best, time.perf_counter() - started)
    return best, traj


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=3, help="runs per backend (best kept)")
    parser.add_argument("--n-modes", type=int, default=2001, help="continuum modes")
    args = parser.parse_args()

    params, grid, schedule = build_problem(args.n_modes)
    n_steps = 12000
    backends = available_backends()
    print(f"workload: {args.n_modes} modes, {n_steps} RK4 steps, state dim {args.n_modes + 4}")
    print(f"backends: {', '.join(backends)}  (best of {args.repeats})\n")

    results = {}
    print(f"{'backend':<10} {'best time':>10} {'steps/s':>12}")
    for backend in backends:
        best, traj = time_backend(backend, params, grid, schedule, args.repeats)
        results[backend] = (best, traj)
        print(f"{backend:<10} {best:>9.3f}s {n_steps / best:>12.0f}")

    if len(results) == 2:
        (fast, (t_fast, traj_a)), (slow, (t_slow, traj_b)) = sorted(
            results.items(), key=lambda kv: kv[1][0]
        )
        diff = float(np.max(np.abs(traj_a.states[-1] - traj_b.states[-1])))
        print(f"\nspeedup: {t_slow / t_fast:.2f}x ({fast} over {slow})")
        print(f"final-state agreement: max |difference| = {diff:.2e}")
        if diff > 1e-10:
            print("WARNING: backends disagree beyond 1e-10")
            return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
