"""Discretized output continuum for the target-cavity loss channel.

The target cavity decays into a one-dimensional continuum (the collection
waveguide).  For wavefunction dynamics the continuum is replaced by a
dense comb of modes, uniformly spaced across a band centered on the
target frequency, each coupled to the target cavity with the same real
strength kappa_prime.  The Markov limit of the mode sum must reproduce
the amplitude decay rate kappa_t of the bare cavity, which fixes the
normalization

    pi * kappa_prime**2 / spacing = kappa_t.

Two artifacts of the discretization bound the usable simulation window:

* recurrence: the comb is periodic in time with period 2*pi/spacing, so
  runs longer than that see the emitted photon come back;
* band truncation: dynamics faster than bandwidth/2 are distorted, so the
  band must comfortably cover every rate in the problem (enforced by a
  guard factor against kappa_t; callers with faster scales should widen
  the band themselves).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ContinuumGrid", "BandwidthError", "build_continuum"]


class BandwidthError(ValueError):
    """Raised when the mode band is too narrow for the requested physics."""


@dataclass(frozen=True)
class ContinuumGrid:
    """Uniform comb of continuum modes around the target frequency.

    ``detunings`` are the mode frequencies relative to the target cavity,
    symmetric about zero.  ``kappa_prime`` is the common target-mode
    coupling; ``kappa_t`` records the decay rate the comb stands in for.
    """

    n_modes: int
    bandwidth: float
    spacing: float
    kappa_prime: float
    kappa_t: float
    detunings: np.ndarray

    @property
    def recurrence_time(self) -> float:
        """Period 2*pi/spacing after which the discretized photon returns."""
        return 2.0 * np.pi / self.spacing


def build_continuum(
    kappa_t: float,
    n_modes: int = 2001,
    bandwidth: float = 40.0,
    *,
    guard_factor: float = 4.0,
) -> ContinuumGrid:
    """Build the mode comb standing in for a decay rate ``kappa_t``.

    ``n_modes`` modes span ``[-bandwidth/2, +bandwidth/2]`` inclusive.
    ``guard_factor`` rejects bands narrower than ``guard_factor * kappa_t``
    (set it to 0 to disable the check, e.g. for convergence studies).
    """
    if not (np.isfinite(kappa_t) and kappa_t > 0.0):
        raise ValueError(f"kappa_t must be positive and finite, got {kappa_t!r}")
    if n_modes < 2:
        raise ValueError(f"need at least 2 modes, got {n_modes}")
    if not (np.isfinite(bandwidth) and bandwidth > 0.0):
        raise ValueError(f"bandwidth must be positive and finite, got {bandwidth!r}")
    if guard_factor < 0.0:
        raise ValueError(f"guard_factor must be >= 0, got {guard_factor}")
    if bandwidth < guard_factor * kappa_t:
        raise BandwidthError(
            f"bandwidth {bandwidth} < {guard_factor} * kappa_t = {guard_factor * kappa_t}; "
            "the comb cannot resolve the decay it replaces"
        )
    spacing = bandwidth / (n_modes - 1)
    detunings = np.linspace(-0.5 * bandwidth, 0.5 * bandwidth, n_modes)
    kappa_prime = np.sqrt(kappa_t * spacing / np.pi)
    return ContinuumGrid(
        n_modes=n_modes,
        bandwidth=bandwidth,
        spacing=spacing,
        kappa_prime=kappa_prime,
        kappa_t=kappa_t,
        detunings=detunings,
    )
