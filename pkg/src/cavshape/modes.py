"""Coupled three-cavity model: Hamiltonians, eigenstructure, emission ratios.

A target cavity (photon loss rate ``kappa_t``) is flanked by two control
cavities (losses ``kappa_l``, ``kappa_r``) with tunneling rate ``eta``.  The
controls are detuned symmetrically from the target, the left by ``+delta``
and the right by ``-delta``, in a frame rotating at the target frequency.
All rates are amplitude rates in units of ``kappa_t`` unless stated
otherwise.  The single-excitation cavity block is

    H = [[ delta - 1j*kappa_l,  eta,                 0                  ],
         [ eta,                 -1j*kappa_t,         eta                ],
         [ 0,                   eta,                 -delta - 1j*kappa_r]]

with basis order (left, target, right).  Losses appear as negative
imaginary diagonal shifts.  Without losses the eigenvalues are
``(0, +s, -s)`` with ``s = sqrt(2*eta**2 + delta**2)``; the zero-frequency
("dark") mode is ``(-1, delta/eta, 1)`` up to normalization, so its weight
on the target cavity,

    x = delta**2 / (2*eta**2 + delta**2),

is steered purely by the detuning: x = 0 at delta = 0 and x -> 1 as
delta >> eta.

A quantum emitter coupled to the target cavity at rate ``g`` sees each
supermode with strength ``g_i = g * alpha_t_i`` (target component of the
mode) and each supermode decays at the weighted loss
``kappa_i = sum_j |alpha_j_i|**2 * kappa_j``.  In the weak-coupling limit
the emitter decay through a single resolved mode is ``2*g_i**2/kappa_i``,
which gives the spontaneous-emission control ratio computed by
:func:`se_rate_ratio`.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SystemParams",
    "EigenSystem",
    "EigensolverError",
    "build_cavity_hamiltonian",
    "analytic_eigenvalues",
    "dark_mode_vector",
    "numeric_eigensystem",
    "target_fraction",
    "ldos_ratio",
    "se_rate_ratio",
    "index_shift_to_detuning",
    "coupled_qe_hamiltonian",
]


class EigensolverError(RuntimeError):
    """Raised when the closed-form eigensolver fails to refine a pair."""


@dataclass(frozen=True)
class SystemParams:
    """Static rates of the three-cavity + emitter system.

    All rates are amplitude rates in units of the target-cavity loss.
    ``kappa_t`` may be zero for lossless eigenstructure studies; the
    dynamics entry points require it to be positive because the target
    loss is what couples the system to the output continuum.
    """

    eta: float = 10.0
    kappa_t: float = 1.0
    kappa_l: float = 1.0
    kappa_r: float = 1.0
    g: float = 0.1
    gamma: float = 0.0
    omega_e_offset: float = 0.0

    def __post_init__(self) -> None:
        for name in ("eta", "kappa_t", "kappa_l", "kappa_r", "g", "gamma", "omega_e_offset"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.eta <= 0.0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        for name in ("kappa_t", "kappa_l", "kappa_r", "gamma"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.g < 0.0:
            raise ValueError(f"g must be >= 0, got {self.g}")

    @property
    def kappas(self) -> np.ndarray:
        """Cavity loss vector in basis order (left, target, right)."""
        return np.array([self.kappa_l, self.kappa_t, self.kappa_r])


@dataclass(frozen=True)
class EigenSystem:
    """Eigen-decomposition of the cavity block.

    ``omegas[i]`` is the complex eigenvalue of mode ``i`` and
    ``vectors[i]`` the corresponding unit eigenvector in basis order
    (left, target, right), phase-fixed so the right-cavity component is
    real and positive.  Mode 0 is the dark mode (real part of the
    eigenvalue closest to zero); modes 1 and 2 are the upper and lower
    bright modes ordered by decreasing real part.

    ``target_fractions[i] = |vectors[i, 1]|**2`` and
    ``effective_losses[i] = sum_j |vectors[i, j]|**2 * kappa_j`` with the
    loss vector read off the Hamiltonian diagonal.
    """

    omegas: np.ndarray
    vectors: np.ndarray
    target_fractions: np.ndarray
    effective_losses: np.ndarray
    dark_index: int = 0


def build_cavity_hamiltonian(params: SystemParams, delta: float) -> np.ndarray:
    """Non-Hermitian 3x3 cavity block at control detuning ``delta``."""
    return np.array(
        [
            [delta - 1j * params.kappa_l, params.eta, 0.0],
            [params.eta, -1j * params.kappa_t, params.eta],
            [0.0, params.eta, -delta - 1j * params.kappa_r],
        ],
        dtype=complex,
    )


def analytic_eigenvalues(eta: float, delta: float) -> np.ndarray:
    """Lossless eigenvalues (0, +s, -s), s = sqrt(2*eta**2 + delta**2)."""
    s = np.sqrt(2.0 * eta**2 + delta**2)
    return np.array([0.0, s, -s])


def dark_mode_vector(eta: float, delta: float) -> np.ndarray:
    """Unit dark-mode vector (-1, delta/eta, 1)/norm of the lossless block.

    The phase convention matches :func:`numeric_eigensystem` (right
    component real positive).
    """
    r = delta / eta
    v = np.array([-1.0, r, 1.0], dtype=complex)
    return v / np.sqrt(2.0 + r**2)


def target_fraction(eta: float, delta: float) -> float:
    """Dark-mode weight on the target cavity, delta**2/(2*eta**2 + delta**2)."""
    return float(delta**2 / (2.0 * eta**2 + delta**2))


# ldos_ratio is the same algebraic quantity as target_fraction: the local
# density of states of the dark mode at the target site, normalized to its
# delta >> eta limit.  Kept as a separate name because callers mean
# different things by it (mode weight vs. emission-spectrum weight).
def ldos_ratio(eta: float, delta: float) -> float:
    """Dark-mode local density of states at the target site, D/D0."""
    return target_fraction(eta, delta)


def _cubic_roots(a: complex, b: complex, c: complex) -> np.ndarray:
    """Roots of the monic cubic z**3 + a*z**2 + b*z + c (Cardano).

    Branch selection avoids cancellation: of the two candidates
    -q/2 +- sqrt(disc) the one with the larger modulus defines the cube
    root, and the paired factor is recovered from p.
    """
    # depressed cubic u**3 + p*u + q with z = u - a/3
    p = b - a * a / 3.0
    q = 2.0 * a**3 / 27.0 - a * b / 3.0 + c
    s = cmath.sqrt(q * q / 4.0 + p**3 / 27.0)
    w3 = -q / 2.0 + s
    if abs(-q / 2.0 - s) > abs(w3):
        w3 = -q / 2.0 - s
    if w3 == 0.0:
        # p == q == 0: triple root at the shift point
        u = np.zeros(3, dtype=complex)
    else:
        w = w3 ** (1.0 / 3.0)
        zeta = complex(-0.5, np.sqrt(3.0) / 2.0)
        ws = np.array([w, w * zeta, w * zeta.conjugate()])
        u = ws - p / (3.0 * ws)
    return u - a / 3.0


def _null_vector_seed(shifted: np.ndarray) -> np.ndarray:
    """Closed-form eigenvector candidate: null direction of a rank-2 matrix.

    For a 3x3 matrix of rank 2 the (bilinear) cross product of any two
    independent rows spans the null space; the largest of the three
    candidates is the numerically safest.  Returns a uniform vector when
    all candidates vanish (rank <= 1, degenerate eigenvalue).
    """
    best = None
    best_norm = 0.0
    for i, j in ((0, 1), (0, 2), (1, 2)):
        cand = np.cross(shifted[i], shifted[j])
        norm = np.linalg.norm(cand)
        if norm > best_norm:
            best, best_norm = cand, norm
    if best_norm <= 1e-300:
        return np.full(3, 1.0 / np.sqrt(3.0), dtype=complex)
    return best / best_norm


def _refine_eigenpair(
    matrix: np.ndarray, lam: complex, scale: float, max_refine: int, tol: float
) -> tuple[complex, np.ndarray]:
    """Inverse iteration + Rayleigh quotient from a Cardano eigenvalue seed."""
    n = matrix.shape[0]
    eye = np.eye(n)
    v = _null_vector_seed(matrix - lam * eye)
    residual = np.inf
    for _ in range(max(max_refine, 1)):
        shifted = matrix - lam * eye
        try:
            w = np.linalg.solve(shifted, v)
        except np.linalg.LinAlgError:
            # exactly singular shift: nudge off the eigenvalue
            w = np.linalg.solve(shifted + (1e-14 * scale + 1e-300) * eye, v)
        norm = np.linalg.norm(w)
        if np.isfinite(norm) and norm > 0.0:
            v = w / norm
        lam = v.conj() @ matrix @ v
        residual = np.linalg.norm(matrix @ v - lam * v)
        if residual <= tol * scale:
            return lam, v
    raise EigensolverError(
        f"eigenpair refinement stalled at residual {residual:.3e} (tol {tol * scale:.3e})"
    )


def numeric_eigensystem(
    matrix: np.ndarray, *, max_refine: int = 8, tol: float = 1e-12
) -> EigenSystem:
    """Eigen-decompose a 3x3 cavity block by closed form plus refinement.

    The characteristic cubic is solved exactly (Cardano) and each root is
    polished by inverse iteration with a Rayleigh-quotient update until
    the residual ``|H v - w v|`` falls below ``tol * scale``.  Phase is
    fixed by the right-cavity component; if that component vanishes the
    target component is used instead.

    The loss vector for ``effective_losses`` is read off the diagonal,
    ``kappa_j = -Im(H[j, j])``, so the function needs no side channel for
    the parameters.
    """
    h = np.asarray(matrix, dtype=complex)
    if h.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h.view(float))):
        raise ValueError("matrix entries must be finite")

    scale = max(float(np.max(np.abs(h))), 1.0)
    # char poly det(z*I - H) = z**3 + a z**2 + b z + c
    a = -np.trace(h)
    b = (
        h[0, 0] * h[1, 1]
        + h[0, 0] * h[2, 2]
        + h[1, 1] * h[2, 2]
        - h[0, 1] * h[1, 0]
        - h[0, 2] * h[2, 0]
        - h[1, 2] * h[2, 1]
    )
    c = -(
        h[0, 0] * (h[1, 1] * h[2, 2] - h[1, 2] * h[2, 1])
        - h[0, 1] * (h[1, 0] * h[2, 2] - h[1, 2] * h[2, 0])
        + h[0, 2] * (h[1, 0] * h[2, 1] - h[1, 1] * h[2, 0])
    )
    roots = _cubic_roots(a, b, c)

    omegas = np.empty(3, dtype=complex)
    vectors = np.empty((3, 3), dtype=complex)
    for i, root in enumerate(roots):
        lam, v = _refine_eigenpair(h, root, scale, max_refine, tol)
        omegas[i] = lam
        vectors[i] = v

    # order: dark mode first (Re closest to 0), then bright by Re descending
    dark = int(np.argmin(np.abs(omegas.real)))
    bright = [i for i in range(3) if i != dark]
    bright.sort(key=lambda i: -omegas[i].real)
    order = [dark] + bright
    omegas = omegas[order]
    vectors = vectors[order]

    # phase: right component real positive, falling back to the target then
    # left component when the preferred ones vanish
    for i in range(3):
        anchor = next(a for a in (vectors[i, 2], vectors[i, 1], vectors[i, 0])
                      if abs(a) > 1e-12)
        vectors[i] *= anchor.conjugate() / abs(anchor)

    kappas = -h.diagonal().imag
    weights = np.abs(vectors) ** 2
    return EigenSystem(
        omegas=omegas,
        vectors=vectors,
        target_fractions=weights[:, 1].copy(),
        effective_losses=weights @ kappas,
        dark_index=0,
    )


def se_rate_ratio(params: SystemParams, delta: float) -> float:
    """Emitter decay through the dark mode relative to the bare target cavity.

    With the dark-mode target weight x and effective loss
    kappa_1 = x*kappa_t + (1 - x)*(kappa_l + kappa_r)/2, the resolved-mode
    decay rate is 2*(g*sqrt(x))**2/kappa_1 and the bare rate 2*g**2/kappa_t,
    so the ratio is x*kappa_t/kappa_1.  Valid when the mode splitting
    sqrt(2*eta**2 + delta**2) dominates every kappa (resolved modes).
    """
    x = target_fraction(params.eta, delta)
    kappa_1 = x * params.kappa_t + (1.0 - x) * 0.5 * (params.kappa_l + params.kappa_r)
    if kappa_1 == 0.0:
        raise ZeroDivisionError("dark mode has zero effective loss; ratio undefined")
    return x * params.kappa_t / kappa_1


def index_shift_to_detuning(dn_over_n: float, omega: float) -> float:
    """Cavity detuning caused by a relative refractive-index shift.

    A shift dn/n moves the resonance by delta = -omega * (dn/n) to first
    order (omega and the returned detuning share the same units).
    """
    return -omega * dn_over_n


def coupled_qe_hamiltonian(params: SystemParams, delta: float) -> np.ndarray:
    """4x4 emitter + supermode block in the cavity eigenbasis.

    Basis order (emitter, dark, upper bright, lower bright).  The emitter
    entry is ``omega_e_offset - 1j*gamma``; each supermode keeps the real
    part of its eigenvalue and the first-order effective loss
    ``-1j*kappa_i``; the couplings ``g_i = g * alpha_t_i`` pick up the
    target component of each mode and are complex in general.
    """
    es = numeric_eigensystem(build_cavity_hamiltonian(params, delta))
    h = np.zeros((4, 4), dtype=complex)
    h[0, 0] = params.omega_e_offset - 1j * params.gamma
    for i in range(3):
        gi = params.g * es.vectors[i, 1]
        h[0, i + 1] = gi
        h[i + 1, 0] = gi.conjugate()
        h[i + 1, i + 1] = es.omegas[i].real - 1j * es.effective_losses[i]
    return h
