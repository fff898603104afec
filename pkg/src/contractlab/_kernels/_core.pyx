# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled menu evaluation kernels (hot path for grid search and env steps).

Keep the floating-point expressions in sync with ``pure.py``: feasibility
comparisons must be exact and use the same operand order.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport log

cnp.import_array()

BACKEND = "compiled"


def batch_menu_rewards(quality, rewards, phi, delta, f, kappa, eta, floor):
    """Constrained platform objective for a batch of reward vectors.

    Returns (values (N,), feasible (N,) uint8); values are 0 where the menu
    violates the quality floor, individual rationality, or incentive
    compatibility.
    """
    cdef double[::1] q = np.ascontiguousarray(quality, dtype=np.float64)
    cdef double[:, ::1] r = np.ascontiguousarray(rewards, dtype=np.float64)
    cdef double[::1] p = np.ascontiguousarray(phi, dtype=np.float64)
    cdef double[::1] d = np.ascontiguousarray(delta, dtype=np.float64)
    cdef double f_ = f, kappa_ = kappa, eta_ = eta, floor_ = floor
    cdef Py_ssize_t n = r.shape[0], k = r.shape[1]
    cdef Py_ssize_t i, t, j

    values_arr = np.zeros(n, dtype=np.float64)
    feas_arr = np.zeros(n, dtype=np.uint8)
    cdef double[::1] values = values_arr
    cdef unsigned char[::1] feas = feas_arr

    cdef bint quality_ok = True
    for j in range(k):
        if q[j] < floor_:
            quality_ok = False
            break
    if not quality_ok:
        return values_arr, feas_arr

    cdef double base = 0.0
    for j in range(k):
        base += d[j] * (eta_ * log((q[j] - floor_) + 1.0))

    cdef bint ok
    cdef double own, alt, best, expected
    for i in range(n):
        ok = f_ * p[0] * r[i, 0] - kappa_ * q[0] >= 0.0
        if ok:
            for t in range(k):
                own = f_ * p[t] * r[i, t] - kappa_ * q[t]
                best = own
                for j in range(k):
                    alt = f_ * p[t] * r[i, j] - kappa_ * q[j]
                    if alt > best:
                        best = alt
                if own < best:
                    ok = False
                    break
        if ok:
            expected = base
            for j in range(k):
                expected -= r[i, j] * d[j]
            values[i] = expected
            feas[i] = 1
    return values_arr, feas_arr


def menu_reward(quality, reward, phi, delta, f, kappa, eta, floor):
    """Single-menu variant; returns (value, feasible)."""
    values, feas = batch_menu_rewards(
        quality, np.asarray(reward, dtype=np.float64)[None, :],
        phi, delta, f, kappa, eta, floor)
    return float(values[0]), bool(feas[0])
