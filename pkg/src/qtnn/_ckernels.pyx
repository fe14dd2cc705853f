# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled ADI kinetic step.

Mirrors qtnn._pykernels.kinetic_step operation for operation: explicit
tridiagonal application along one grid axis, batched Thomas solve along
the other, then the same pair with the axes swapped.
"""

import numpy as np


def kinetic_step(const double complex[:, ::1] psi, double rx, double ry,
                 const double complex[::1] cpx, const double complex[::1] invdx,
                 const double complex[::1] cpy, const double complex[::1] invdy):
    cdef Py_ssize_t nx = psi.shape[0]
    cdef Py_ssize_t ny = psi.shape[1]
    cdef Py_ssize_t m = nx - 2
    cdef Py_ssize_t n = ny - 2
    cdef Py_ssize_t i, j

    cdef double complex ox = -1j * rx
    cdef double complex oy = -1j * ry
    cdef double complex jrx = 1j * rx
    cdef double complex jry = 1j * ry
    cdef double complex dy_exp = 1.0 - 2j * ry
    cdef double complex dx_exp = 1.0 - 2j * rx

    out_arr = np.zeros((nx, ny), dtype=np.complex128)
    work_arr = np.empty((m, n), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef double complex[:, ::1] work = work_arr

    # x-implicit half-step. rhs (I - i ry Ty) psi, forward elimination
    # fused: row i only needs row i-1 of the eliminated values.
    for j in range(n):
        work[0, j] = (dy_exp * psi[1, j + 1] + jry * (psi[1, j + 2] + psi[1, j])) * invdx[0]
    for i in range(1, m):
        for j in range(n):
            work[i, j] = (dy_exp * psi[i + 1, j + 1] + jry * (psi[i + 1, j + 2] + psi[i + 1, j])
                          - ox * work[i - 1, j]) * invdx[i]
    for i in range(m - 2, -1, -1):
        for j in range(n):
            work[i, j] = work[i, j] - cpx[i] * work[i + 1, j]

    # y-implicit half-step on the intermediate field (zero outside the ring).
    for i in range(m):
        for j in range(n):
            out[i + 1, j + 1] = dx_exp * work[i, j]
            if i > 0:
                out[i + 1, j + 1] = out[i + 1, j + 1] + jrx * work[i - 1, j]
            if i < m - 1:
                out[i + 1, j + 1] = out[i + 1, j + 1] + jrx * work[i + 1, j]
    for i in range(1, nx - 1):
        out[i, 1] = out[i, 1] * invdy[0]
        for j in range(1, n):
            out[i, j + 1] = (out[i, j + 1] - oy * out[i, j]) * invdy[j]
        for j in range(n - 2, -1, -1):
            out[i, j + 1] = out[i, j + 1] - cpy[j] * out[i, j + 2]
    return out_arr
