# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled RK4 kernel for the amplitude equations.

Mirrors ``_kernel_py.run_rk4`` exactly; see that module for the state
layout, the amplitude equations, and the half-step detuning convention.

The state is split into separate real and imaginary double arrays inside
the kernel: every coupling is real and the only complex coefficients are
pure rotations, so the split turns the hot loops into plain double
arithmetic that the C compiler can vectorize.
"""

import numpy as np

from libc.math cimport sqrt

BACKEND_NAME = "compiled"


cdef void _rhs(
    const double* yr, const double* yi,
    double* dr, double* di,
    const double* dk,
    Py_ssize_t n,
    double g, double gamma, double omega_e, double eta,
    double kappa_l, double kappa_r, double kappa_int, double kappa_prime,
    double delta,
) noexcept:
    cdef Py_ssize_t j
    cdef double sum_r = 0.0, sum_i = 0.0
    cdef double kp_yr1, kp_yi1, w
    for j in range(4, n):
        sum_r += yr[j]
        sum_i += yi[j]
    dr[0] = g * yr[1] - gamma * yr[0] + omega_e * yi[0]
    di[0] = g * yi[1] - gamma * yi[0] - omega_e * yr[0]
    dr[1] = -g * yr[0] - eta * (yr[2] + yr[3]) + kappa_prime * sum_r - kappa_int * yr[1]
    di[1] = -g * yi[0] - eta * (yi[2] + yi[3]) + kappa_prime * sum_i - kappa_int * yi[1]
    dr[2] = eta * yr[1] + delta * yi[2] - kappa_l * yr[2]
    di[2] = eta * yi[1] - delta * yr[2] - kappa_l * yi[2]
    dr[3] = eta * yr[1] - delta * yi[3] - kappa_r * yr[3]
    di[3] = eta * yi[1] + delta * yr[3] - kappa_r * yi[3]
    kp_yr1 = kappa_prime * yr[1]
    kp_yi1 = kappa_prime * yi[1]
    for j in range(4, n):
        w = dk[j - 4]
        dr[j] = w * yi[j] - kp_yr1
        di[j] = -w * yr[j] - kp_yi1


def run_rk4(
    y0,
    detunings,
    delta_half,
    double g,
    double gamma,
    double omega_e,
    double eta,
    double kappa_l,
    double kappa_r,
    double kappa_int,
    double kappa_prime,
    double dt,
    Py_ssize_t n_steps,
    snap_steps,
    double norm_cap,
):
    y0c = np.ascontiguousarray(y0, dtype=complex)
    cdef double[::1] yr = np.ascontiguousarray(y0c.real)
    cdef double[::1] yi = np.ascontiguousarray(y0c.imag)
    cdef const double[::1] dk = np.ascontiguousarray(detunings, dtype=float)
    cdef const double[::1] dh = np.ascontiguousarray(delta_half, dtype=float)
    cdef const long long[::1] snaps = np.ascontiguousarray(snap_steps, dtype=np.int64)
    cdef Py_ssize_t n = yr.shape[0]
    cdef Py_ssize_t n_snap = snaps.shape[0]

    snap_re = np.zeros((n_snap, n))
    snap_im = np.zeros((n_snap, n))
    norms_arr = np.full(n_steps + 1, np.nan)
    cdef double[:, ::1] sr = snap_re
    cdef double[:, ::1] si = snap_im
    cdef double[::1] norms = norms_arr

    work = np.empty((10, n))
    cdef double[:, ::1] w = work
    cdef double* k1r = &w[0, 0]
    cdef double* k1i = &w[1, 0]
    cdef double* k2r = &w[2, 0]
    cdef double* k2i = &w[3, 0]
    cdef double* k3r = &w[4, 0]
    cdef double* k3i = &w[5, 0]
    cdef double* k4r = &w[6, 0]
    cdef double* k4i = &w[7, 0]
    cdef double* tr = &w[8, 0]
    cdef double* ti = &w[9, 0]
    cdef double* pyr = &yr[0]
    cdef double* pyi = &yi[0]
    cdef const double* pdk = &dk[0]

    cdef Py_ssize_t m, i, next_snap = 0
    cdef double half = dt / 2.0
    cdef double sixth = dt / 6.0
    cdef double d0, d1, d2, normsq, norm
    cdef Py_ssize_t fail_step = -1

    normsq = 0.0
    for i in range(n):
        normsq += pyr[i] * pyr[i] + pyi[i] * pyi[i]
    norms[0] = sqrt(normsq)
    if next_snap < n_snap and snaps[next_snap] == 0:
        for i in range(n):
            sr[next_snap, i] = pyr[i]
            si[next_snap, i] = pyi[i]
        next_snap += 1

    for m in range(n_steps):
        d0 = dh[2 * m]
        d1 = dh[2 * m + 1]
        d2 = dh[2 * m + 2]

        _rhs(pyr, pyi, k1r, k1i, pdk, n, g, gamma, omega_e, eta,
             kappa_l, kappa_r, kappa_int, kappa_prime, d0)
        for i in range(n):
            tr[i] = pyr[i] + half * k1r[i]
            ti[i] = pyi[i] + half * k1i[i]
        _rhs(tr, ti, k2r, k2i, pdk, n, g, gamma, omega_e, eta,
             kappa_l, kappa_r, kappa_int, kappa_prime, d1)
        for i in range(n):
            tr[i] = pyr[i] + half * k2r[i]
            ti[i] = pyi[i] + half * k2i[i]
        _rhs(tr, ti, k3r, k3i, pdk, n, g, gamma, omega_e, eta,
             kappa_l, kappa_r, kappa_int, kappa_prime, d1)
        for i in range(n):
            tr[i] = pyr[i] + dt * k3r[i]
            ti[i] = pyi[i] + dt * k3i[i]
        _rhs(tr, ti, k4r, k4i, pdk, n, g, gamma, omega_e, eta,
             kappa_l, kappa_r, kappa_int, kappa_prime, d2)

        normsq = 0.0
        for i in range(n):
            pyr[i] = pyr[i] + sixth * (k1r[i] + 2.0 * (k2r[i] + k3r[i]) + k4r[i])
            pyi[i] = pyi[i] + sixth * (k1i[i] + 2.0 * (k2i[i] + k3i[i]) + k4i[i])
            normsq += pyr[i] * pyr[i] + pyi[i] * pyi[i]
        norm = sqrt(normsq)
        norms[m + 1] = norm
        if not norm <= norm_cap:
            fail_step = m + 1
            break
        if next_snap < n_snap and snaps[next_snap] == m + 1:
            for i in range(n):
                sr[next_snap, i] = pyr[i]
                si[next_snap, i] = pyi[i]
            next_snap += 1

    snapshots_arr = snap_re + 1j * snap_im
    return snapshots_arr, norms_arr, fail_step
