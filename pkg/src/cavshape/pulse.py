"""Output-pulse reconstruction and quality metrics.

After a run ends at time T the excitation left in the continuum modes is
a frozen spectrum; free evolution turns it into the outgoing temporal
envelope

    f(t) = sqrt(spacing / 2*pi) * sum_k c_k(T) * exp(-1j*detuning_k*(t - T)).

The prefactor makes |f|**2 a probability density in time: integrating it
over one recurrence period of the mode comb returns sum |c_k|**2 exactly
(uniform grids make the trapezoid rule exact for the comb's Fourier
modes), so on any window that contains the emission the pulse energy
equals the continuum population.

Quality metrics:

* :func:`fit_gaussian` fits A*exp(-(t-t0)**2/(2*sigma**2)) to |f|**2 and
  reports r**2;
* :func:`overlap_fidelity` computes the normalized overlap
  F = |<f, h>|**2 / (|f|**2 |h|**2) between two envelopes, used with
  :func:`time_invert` to score time-reversal symmetry about the window
  midpoint;
* :func:`phase_profile` reports the phase across the intense part of the
  pulse; a transform-limited envelope has a flat profile.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .continuum import ContinuumGrid

__all__ = [
    "Waveform",
    "PhaseProfile",
    "GaussianFit",
    "FidelityReport",
    "AliasingError",
    "GaussianFitError",
    "make_waveform",
    "extract_output_pulse",
    "phase_profile",
    "fit_gaussian",
    "time_invert",
    "overlap_fidelity",
]


class AliasingError(ValueError):
    """Run longer than the mode comb's recurrence period."""


class GaussianFitError(RuntimeError):
    """Gaussian fit could not produce a finite positive-width result."""


@dataclass(frozen=True)
class Waveform:
    """Complex envelope f(t) on a time grid, with its energy int |f|**2 dt."""

    times: np.ndarray
    amplitudes: np.ndarray
    energy: float


def make_waveform(times: np.ndarray, amplitudes: np.ndarray) -> Waveform:
    """Wrap samples into a :class:`Waveform`, computing the energy."""
    t = np.asarray(times, dtype=float)
    a = np.asarray(amplitudes, dtype=complex)
    if t.ndim != 1 or t.shape != a.shape or t.size < 2:
        raise ValueError("times and amplitudes must be equal-length 1d arrays (>= 2 points)")
    if np.any(np.diff(t) <= 0.0):
        raise ValueError("times must be strictly increasing")
    energy = float(np.trapezoid(np.abs(a) ** 2, t))
    return Waveform(times=t, amplitudes=a, energy=energy)


def extract_output_pulse(
    c_k: np.ndarray,
    grid: ContinuumGrid,
    t_grid: np.ndarray,
    t_reference: float,
) -> Waveform:
    """Outgoing envelope from the continuum amplitudes ``c_k`` at ``t_reference``.

    ``t_grid`` is the evaluation grid (need not contain ``t_reference``).
    Raises :class:`AliasingError` when ``t_reference`` exceeds the comb's
    recurrence period, because the stored spectrum then no longer
    represents a single outgoing pulse.
    """
    c_k = np.asarray(c_k, dtype=complex)
    if c_k.shape != (grid.n_modes,):
        raise ValueError(f"expected {grid.n_modes} mode amplitudes, got shape {c_k.shape}")
    if t_reference > grid.recurrence_time:
        raise AliasingError(
            f"reference time {t_reference:.6g} exceeds the recurrence period "
            f"{grid.recurrence_time:.6g}; increase the mode count or shorten the run"
        )
    t = np.asarray(t_grid, dtype=float)
    # chunk the phase matrix so long grids do not allocate n_t x n_modes at once
    amps = np.empty(t.size, dtype=complex)
    chunk = max(1, int(4_000_000 // max(grid.n_modes, 1)))
    for start in range(0, t.size, chunk):
        stop = min(start + chunk, t.size)
        phases = np.exp(-1j * np.outer(t[start:stop] - t_reference, grid.detunings))
        amps[start:stop] = phases @ c_k
    amps *= np.sqrt(grid.spacing / (2.0 * np.pi))
    return make_waveform(t, amps)


@dataclass(frozen=True)
class PhaseProfile:
    """Unwrapped phase across the intense part of a pulse.

    The window keeps samples with |f|**2 >= threshold_fraction * peak;
    ``flatness`` is max(phase) - min(phase) after unwrapping, in radians.
    """

    times: np.ndarray
    phase: np.ndarray
    flatness: float
    threshold_fraction: float


def phase_profile(waveform: Waveform, threshold_fraction: float = 0.01) -> PhaseProfile:
    """Phase of ``waveform`` where the intensity is above threshold."""
    if not (0.0 < threshold_fraction < 1.0):
        raise ValueError(f"threshold_fraction must be in (0, 1), got {threshold_fraction}")
    intensity = np.abs(waveform.amplitudes) ** 2
    peak = intensity.max()
    if peak <= 0.0:
        raise ValueError("waveform has zero intensity everywhere")
    mask = intensity >= threshold_fraction * peak
    first, last = np.flatnonzero(mask)[[0, -1]]
    sel = slice(first, last + 1)
    phase = np.unwrap(np.angle(waveform.amplitudes[sel]))
    return PhaseProfile(
        times=waveform.times[sel].copy(),
        phase=phase,
        flatness=float(phase.max() - phase.min()),
        threshold_fraction=threshold_fraction,
    )


@dataclass(frozen=True)
class GaussianFit:
    """Least-squares Gaussian A*exp(-(t-t0)**2/(2 sigma**2)) on an intensity."""

    amplitude: float
    center: float
    width: float
    r_squared: float


def _gaussian(t: np.ndarray, amplitude: float, center: float, width: float) -> np.ndarray:
    return amplitude * np.exp(-((t - center) ** 2) / (2.0 * width**2))


def fit_gaussian(waveform: Waveform, *, refine_steps: int = 12) -> GaussianFit:
    """Fit a Gaussian to the intensity |f(t)|**2 of ``waveform``.

    Deterministic two-stage fit: a weighted quadratic fit of log-intensity
    seeds (A, t0, sigma) in closed form, then a few Gauss-Newton passes on
    the direct residual, each accepted only if it lowers the squared
    error.  r**2 is computed over all samples against the mean model.
    """
    t = waveform.times
    y = np.abs(waveform.amplitudes) ** 2
    peak = y.max()
    if not (np.isfinite(peak) and peak > 0.0):
        raise GaussianFitError("intensity is zero or non-finite; nothing to fit")

    # stage 1: log-domain weighted quadratic. Weights y**2 make the
    # linearized problem match the direct least squares at the peak.
    mask = y > peak * 1e-3
    if np.count_nonzero(mask) >= 3:
        tm, ym = t[mask], y[mask]
        coeffs = np.polyfit(tm, np.log(ym), 2, w=ym)
        curvature = coeffs[0]
    else:
        curvature = 0.0
    seed = None
    if curvature < 0.0:
        sigma = float(np.sqrt(-1.0 / (2.0 * curvature)))
        center = float(-coeffs[1] / (2.0 * curvature))
        log_amp = coeffs[2] + center**2 / (2.0 * sigma**2)
        # near-linear log data (e.g. an exponential tail) pushes the
        # apex far outside the window and overflows the amplitude
        if np.isfinite(log_amp) and log_amp < 0.5 * np.log(np.finfo(float).max):
            seed = (float(np.exp(log_amp)), center, sigma)
    if seed is None:
        # fallback: moment estimates (log fit degenerate, e.g. flat data)
        total = np.trapezoid(y, t)
        if total <= 0.0:
            raise GaussianFitError("intensity has no integrable weight")
        center = float(np.trapezoid(t * y, t) / total)
        var = float(np.trapezoid((t - center) ** 2 * y, t) / total)
        if var <= 0.0:
            raise GaussianFitError("intensity has no measurable width")
        seed = (float(peak), center, float(np.sqrt(var)))
    amplitude, center, sigma = seed

    # stage 2: Gauss-Newton on (A, t0, sigma), improvement-guarded
    theta = np.array([amplitude, center, sigma])
    resid = _gaussian(t, *theta) - y
    best = float(resid @ resid)
    for _ in range(refine_steps):
        a, t0, s = theta
        e = np.exp(-((t - t0) ** 2) / (2.0 * s**2))
        jac = np.column_stack((e, a * e * (t - t0) / s**2, a * e * (t - t0) ** 2 / s**3))
        try:
            step, *_ = np.linalg.lstsq(jac, y - _gaussian(t, *theta), rcond=None)
        except np.linalg.LinAlgError:
            break
        trial = theta + step
        if not np.all(np.isfinite(trial)) or trial[0] <= 0.0 or trial[2] <= 0.0:
            break
        resid = _gaussian(t, *trial) - y
        err = float(resid @ resid)
        if err >= best:
            break
        theta, best = trial, err

    amplitude, center, sigma = (float(v) for v in theta)
    if not (np.isfinite(sigma) and sigma > 0.0 and np.isfinite(amplitude) and amplitude > 0.0):
        raise GaussianFitError(f"fit diverged: amplitude={amplitude}, width={sigma}")

    model = _gaussian(t, amplitude, center, sigma)
    ss_res = float(np.sum((y - model) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 0.0
    return GaussianFit(amplitude=amplitude, center=center, width=sigma, r_squared=r_squared)


def time_invert(waveform: Waveform) -> Waveform:
    """Time-reverse about the window midpoint: f(t) -> conj(f(t0 + t1 - t)).

    Requires a uniform grid so the reflected samples land on the same
    times; energy is preserved.  Applying it twice returns the original.
    """
    t = waveform.times
    steps = np.diff(t)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ValueError("time inversion needs a uniform time grid")
    return Waveform(
        times=t.copy(),
        amplitudes=np.conj(waveform.amplitudes[::-1]),
        energy=waveform.energy,
    )


@dataclass(frozen=True)
class FidelityReport:
    """Normalized overlap of two envelopes plus the first one's phase flatness."""

    fidelity: float
    phase_flatness: float
    threshold_fraction: float


def overlap_fidelity(
    f: Waveform, h: Waveform, *, threshold_fraction: float = 0.01
) -> FidelityReport:
    """F = |int conj(f) h|**2 / (int |f|**2 int |h|**2) on the common window.

    Waveforms on different grids are linearly resampled onto the finer
    grid restricted to the overlap of the two time windows.  The phase
    flatness of ``f`` (see :func:`phase_profile`) rides along because the
    two are always reported together.
    """
    lo = max(f.times[0], h.times[0])
    hi = min(f.times[-1], h.times[-1])
    if hi <= lo:
        raise ValueError("waveforms do not overlap in time")

    def spacing(w: Waveform) -> float:
        return float(np.min(np.diff(w.times)))

    step = min(spacing(f), spacing(h))
    n = max(2, int(round((hi - lo) / step)) + 1)
    grid = np.linspace(lo, hi, n)

    def resample(w: Waveform) -> np.ndarray:
        return np.interp(grid, w.times, w.amplitudes.real) + 1j * np.interp(
            grid, w.times, w.amplitudes.imag
        )

    fa, ha = resample(f), resample(h)
    ef = np.trapezoid(np.abs(fa) ** 2, grid)
    eh = np.trapezoid(np.abs(ha) ** 2, grid)
    if ef <= 0.0 or eh <= 0.0:
        raise ValueError("waveform energy vanishes on the common window")
    overlap = np.trapezoid(np.conj(fa) * ha, grid)
    fidelity = float(np.abs(overlap) ** 2 / (ef * eh))
    flat = phase_profile(f, threshold_fraction).flatness
    return FidelityReport(
        fidelity=fidelity, phase_flatness=flat, threshold_fraction=threshold_fraction
    )
