# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled normal-form block solve.

Same contract as ``coltherm._solve_py.solve_normal_form``: solves
``W V W - 1/4 Omega V Omega^T = rhs`` over the decoupled 2x2 blocks that
couple entry ``(i, j)`` to ``(i^1, j^1)``.  One fused pass, no temporaries.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


def solve_normal_form(object nu, object rhs, double cutoff):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] nu_arr = np.ascontiguousarray(nu, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] r_arr = np.ascontiguousarray(rhs, dtype=np.float64)
    cdef Py_ssize_t n = nu_arr.shape[0]
    cdef Py_ssize_t m = 2 * n
    if r_arr.shape[0] != m or r_arr.shape[1] != m:
        raise ValueError("rhs shape does not match the symplectic spectrum")

    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.empty((m, m), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w_arr = np.empty(m, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] mu_arr = np.empty(m, dtype=np.float64)

    cdef double[:, ::1] r = r_arr
    cdef double[:, ::1] out = out_arr
    cdef double[::1] w = w_arr
    cdef double[::1] mu = mu_arr

    cdef Py_ssize_t i, j, k
    for k in range(n):
        w[2 * k] = nu_arr[k]
        w[2 * k + 1] = nu_arr[k]
        mu[2 * k] = nu_arr[k] - 0.5
        mu[2 * k + 1] = nu_arr[k] - 0.5

    cdef double a, a_minus, a_plus, d_plus, d_minus
    cdef double r1, r2, u_plus, u_minus, x_plus, x_minus
    cdef bint same, drop
    cdef Py_ssize_t n_reg = 0

    # visit each unordered block {(i, j), (i^1, j^1)} once: even i, all j
    for i in range(0, m, 2):
        for j in range(m):
            a = w[i] * w[j]
            # a - 1/4 without cancellation (mu = nu - 1/2)
            a_minus = mu[i] * mu[j] + 0.5 * (mu[i] + mu[j])
            a_plus = a + 0.25
            same = (j % 2) == 0  # s_i s_j = +1 (i is an x index here)
            if same:
                d_plus = a_minus
                d_minus = a_plus
            else:
                d_plus = a_plus
                d_minus = a_minus
            r1 = r[i, j]
            r2 = r[i ^ 1, j ^ 1]
            u_plus = 0.5 * (r1 + r2)
            u_minus = 0.5 * (r1 - r2)
            drop = 0
            if d_plus > cutoff or d_plus < -cutoff:
                x_plus = u_plus / d_plus
            else:
                x_plus = 0.0
                drop = 1
            if d_minus > cutoff or d_minus < -cutoff:
                x_minus = u_minus / d_minus
            else:
                x_minus = 0.0
                drop = 1
            out[i, j] = x_plus + x_minus
            out[i ^ 1, j ^ 1] = x_plus - x_minus
            if drop:
                n_reg += 1

    return out_arr, n_reg
