"""Model-core tests: Hamiltonians, eigenstructure, emission ratios.

The closed-form eigensolver is checked against numpy.linalg.eig as an
independent oracle on seeded random draws; analytic lossless results are
frozen by hand.
"""

import math

import numpy as np
import pytest

from cavshape.modes import (
    SystemParams,
    analytic_eigenvalues,
    build_cavity_hamiltonian,
    coupled_qe_hamiltonian,
    dark_mode_vector,
    index_shift_to_detuning,
    ldos_ratio,
    numeric_eigensystem,
    se_rate_ratio,
    target_fraction,
)

LOSSLESS = SystemParams(eta=10.0, kappa_t=0.0, kappa_l=0.0, kappa_r=0.0)


def random_params(rng):
    return SystemParams(
        eta=float(rng.uniform(0.5, 20.0)),
        kappa_t=float(rng.uniform(0.0, 3.0)),
        kappa_l=float(rng.uniform(0.0, 12.0)),
        kappa_r=float(rng.uniform(0.0, 12.0)),
        g=float(rng.uniform(0.0, 1.0)),
        gamma=float(rng.uniform(0.0, 0.5)),
    )


def test_hamiltonian_entries():
    p = SystemParams(eta=3.0, kappa_t=1.0, kappa_l=2.0, kappa_r=4.0)
    h = build_cavity_hamiltonian(p, 5.0)
    expected = np.array(
        [
            [5.0 - 2.0j, 3.0, 0.0],
            [3.0, -1.0j, 3.0],
            [0.0, 3.0, -5.0 - 4.0j],
        ]
    )
    assert np.array_equal(h, expected)


def test_analytic_eigenvalues_values():
    vals = analytic_eigenvalues(10.0, 0.0)
    s = 10.0 * math.sqrt(2.0)
    assert np.allclose(vals, [0.0, s, -s], atol=1e-14)
    vals = analytic_eigenvalues(10.0, 10.0)
    assert np.allclose(vals, [0.0, math.sqrt(300.0), -math.sqrt(300.0)], atol=1e-12)


def test_dark_vector_cases():
    v0 = dark_mode_vector(10.0, 0.0)
    assert np.allclose(v0, np.array([-1.0, 0.0, 1.0]) / math.sqrt(2.0), atol=1e-15)
    v1 = dark_mode_vector(10.0, 10.0)
    assert np.allclose(v1, np.array([-1.0, 1.0, 1.0]) / math.sqrt(3.0), atol=1e-15)
    assert math.isclose(np.linalg.norm(v1), 1.0, rel_tol=1e-14)
    # annihilated by the lossless Hamiltonian
    h = build_cavity_hamiltonian(LOSSLESS, 10.0)
    assert np.linalg.norm(h @ v1) < 1e-12


def test_target_fraction_curve():
    assert target_fraction(10.0, 0.0) == 0.0
    assert math.isclose(target_fraction(10.0, 10.0), 1.0 / 3.0, rel_tol=1e-15)
    assert math.isclose(ldos_ratio(10.0, math.sqrt(2.0) * 10.0), 0.5, rel_tol=1e-14)
    deltas = np.linspace(0.0, 100.0, 300)
    fracs = np.array([target_fraction(10.0, d) for d in deltas])
    assert np.all(np.diff(fracs) > 0.0)
    assert fracs[-1] > 0.97


def test_numeric_eigensystem_matches_lapack():
    rng = np.random.default_rng(20240811)
    worst_val = 0.0
    worst_res = 0.0
    for _ in range(100):
        p = random_params(rng)
        h = build_cavity_hamiltonian(p, float(rng.uniform(-60.0, 60.0)))
        es = numeric_eigensystem(h)
        ref = np.sort_complex(np.linalg.eig(h)[0])
        got = np.sort_complex(es.omegas)
        worst_val = max(worst_val, float(np.max(np.abs(ref - got))))
        for k in range(3):
            res = np.linalg.norm(h @ es.vectors[k] - es.omegas[k] * es.vectors[k])
            worst_res = max(worst_res, float(res))
            assert math.isclose(np.linalg.norm(es.vectors[k]), 1.0, rel_tol=1e-12)
    assert worst_val < 1e-8
    assert worst_res < 1e-8


def test_numeric_eigensystem_lossless_structure():
    rng = np.random.default_rng(7)
    for _ in range(25):
        delta = float(rng.uniform(-40.0, 40.0))
        es = numeric_eigensystem(build_cavity_hamiltonian(LOSSLESS, delta))
        s = math.sqrt(2.0 * 100.0 + delta**2)
        assert abs(es.omegas[0]) < 1e-10
        assert abs(es.omegas[1] - s) < 1e-9
        assert abs(es.omegas[2] + s) < 1e-9
        assert es.dark_index == 0
        # completeness: the three modes share the target site fully
        assert math.isclose(float(np.sum(es.target_fractions)), 1.0, abs_tol=1e-9)
        assert math.isclose(
            es.target_fractions[0], target_fraction(10.0, delta), abs_tol=1e-9
        )
        assert np.all(es.effective_losses < 1e-10)
        # phase convention: right component real positive
        for k in range(3):
            anchor = es.vectors[k, 2]
            assert abs(anchor.imag) < 1e-10
            assert anchor.real > 0.0


def test_numeric_dark_vector_matches_analytic():
    for delta in (0.0, 3.0, 10.0, 25.0):
        es = numeric_eigensystem(build_cavity_hamiltonian(LOSSLESS, delta))
        assert np.allclose(es.vectors[0], dark_mode_vector(10.0, delta), atol=1e-9)


def test_effective_losses_first_order():
    # small losses: numeric weighted losses match the lossless-mode formula
    eps = 1e-4
    p = SystemParams(eta=10.0, kappa_t=1.0 * eps, kappa_l=7.0 * eps, kappa_r=7.0 * eps)
    delta = 10.0
    es = numeric_eigensystem(build_cavity_hamiltonian(p, delta))
    x = target_fraction(10.0, delta)
    dark_expected = x * p.kappa_t + (1.0 - x) * 0.5 * (p.kappa_l + p.kappa_r)
    assert math.isclose(es.effective_losses[0], dark_expected, rel_tol=1e-6)
    # eigenvalue imaginary part agrees with the weighted loss to first order
    assert math.isclose(-es.omegas[0].imag, dark_expected, rel_tol=1e-6)


def test_numeric_eigensystem_rejects_bad_input():
    with pytest.raises(ValueError):
        numeric_eigensystem(np.eye(2))
    bad = np.eye(3, dtype=complex)
    bad[0, 0] = np.nan
    with pytest.raises(ValueError):
        numeric_eigensystem(bad)


def test_numeric_eigensystem_defective_matrix_yields_valid_pairs():
    # a Jordan block has a single eigenvector; each returned pair must
    # still satisfy the eigen equation even though they coincide
    h = np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]], dtype=complex)
    es = numeric_eigensystem(h)
    for k in range(3):
        assert np.linalg.norm(h @ es.vectors[k] - es.omegas[k] * es.vectors[k]) < 1e-10


def test_se_rate_ratio_values():
    p = SystemParams(eta=10.0, kappa_t=1.0, kappa_l=10.0, kappa_r=10.0)
    assert se_rate_ratio(p, 0.0) == 0.0
    assert math.isclose(se_rate_ratio(p, 10.0), 1.0 / 21.0, rel_tol=1e-12)
    deltas = np.linspace(0.0, 200.0, 400)
    ratios = np.array([se_rate_ratio(p, d) for d in deltas])
    assert np.all(np.diff(ratios) > 0.0)
    # equal losses: the ratio reduces to the target fraction itself
    q = SystemParams(eta=10.0, kappa_t=1.0, kappa_l=1.0, kappa_r=1.0)
    for d in (0.0, 5.0, 10.0, 40.0):
        assert math.isclose(se_rate_ratio(q, d), target_fraction(10.0, d), rel_tol=1e-14)
    lossless_dark = SystemParams(eta=10.0, kappa_t=1.0, kappa_l=0.0, kappa_r=0.0)
    with pytest.raises(ZeroDivisionError):
        se_rate_ratio(SystemParams(eta=10.0, kappa_t=1.0, kappa_l=0.0, kappa_r=0.0), 0.0)
    # with lossless controls every decay is through the target channel
    assert math.isclose(se_rate_ratio(lossless_dark, 10.0), 1.0, rel_tol=1e-14)


def test_index_shift_to_detuning():
    # a -5e-5 relative index shift at a 2e5 carrier detunes by +10
    assert math.isclose(index_shift_to_detuning(-5e-5, 2e5), 10.0, rel_tol=1e-15)
    assert index_shift_to_detuning(0.0, 2e5) == 0.0


def test_coupled_qe_hamiltonian_structure():
    p = SystemParams(eta=10.0, kappa_t=0.0, kappa_l=0.0, kappa_r=0.0, g=0.1)
    h = coupled_qe_hamiltonian(p, 0.0)
    assert h.shape == (4, 4)
    # at delta = 0 the dark mode has no target weight: emitter decouples from it
    assert abs(h[0, 1]) < 1e-12
    assert math.isclose(abs(h[0, 2]), 0.1 / math.sqrt(2.0), rel_tol=1e-9)
    assert math.isclose(abs(h[0, 3]), 0.1 / math.sqrt(2.0), rel_tol=1e-9)
    # coupling block is conjugate-symmetric
    for k in range(1, 4):
        assert h[k, 0] == h[0, k].conjugate()

    # weak losses: couplings and mode losses follow the lossless-mode formulas
    q = SystemParams(eta=10.0, kappa_t=0.01, kappa_l=0.1, kappa_r=0.1, g=0.1, gamma=0.02)
    h = coupled_qe_hamiltonian(q, 10.0)
    assert h[0, 0] == pytest.approx(-0.02j, abs=1e-15)
    x = target_fraction(10.0, 10.0)
    assert abs(h[0, 1]) == pytest.approx(0.1 * math.sqrt(x), rel=1e-4)
    kappa_dark = x * q.kappa_t + (1.0 - x) * 0.5 * (q.kappa_l + q.kappa_r)
    assert -h[1, 1].imag == pytest.approx(kappa_dark, rel=1e-4)

    # strong losses: entries follow the definitional eigensystem quantities
    q2 = SystemParams(eta=10.0, kappa_t=1.0, kappa_l=10.0, kappa_r=10.0, g=0.1)
    es = numeric_eigensystem(build_cavity_hamiltonian(q2, 10.0))
    h2 = coupled_qe_hamiltonian(q2, 10.0)
    for k in range(3):
        assert h2[0, k + 1] == pytest.approx(0.1 * es.vectors[k, 1], rel=1e-12)
        assert h2[k + 1, k + 1] == pytest.approx(
            es.omegas[k].real - 1j * es.effective_losses[k], rel=1e-12
        )


def test_system_params_validation():
    with pytest.raises(ValueError):
        SystemParams(eta=0.0)
    with pytest.raises(ValueError):
        SystemParams(kappa_t=-1.0)
    with pytest.raises(ValueError):
        SystemParams(g=-0.1)
    with pytest.raises(ValueError):
        SystemParams(gamma=float("nan"))
    p = SystemParams(kappa_t=0.0)  # lossless target is representable
    assert np.array_equal(p.kappas, [1.0, 0.0, 1.0])
