"""NumPy implementation of the ADI kinetic step (fallback backend).

Same algorithm as the compiled kernel: an x-implicit Crank-Nicolson
half-step followed by a y-implicit one, each a batch of Thomas solves
against the precomputed LU factors of the constant tridiagonal matrix
``I + i r T`` (diagonal ``1 + 2ir``, off-diagonal ``-ir``).
"""

import numpy as np


def kinetic_step(psi, rx, ry, cpx, invdx, cpy, invdy):
    """Advance the kinetic part of one time step on the interior cells.

    ``psi`` is the full (nx, ny) field with a zero boundary ring; the
    returned array has the same shape and a zero ring again.
    """
    ox = -1j * rx
    oy = -1j * ry
    m = psi.shape[0] - 2
    n = psi.shape[1] - 2

    # x-implicit half-step: rhs = (I - i r_y T_y) psi
    rhs = (1.0 - 2.0j * ry) * psi[1:-1, 1:-1] + (1.0j * ry) * (psi[1:-1, 2:] + psi[1:-1, :-2])
    work = np.empty_like(rhs)
    work[0] = rhs[0] * invdx[0]
    for i in range(1, m):
        work[i] = (rhs[i] - ox * work[i - 1]) * invdx[i]
    half = np.empty_like(rhs)
    half[m - 1] = work[m - 1]
    for i in range(m - 2, -1, -1):
        half[i] = work[i] - cpx[i] * half[i + 1]

    # y-implicit half-step: rhs = (I - i r_x T_x) psi*, zero outside the ring
    rhs2 = (1.0 - 2.0j * rx) * half
    rhs2[:-1] += (1.0j * rx) * half[1:]
    rhs2[1:] += (1.0j * rx) * half[:-1]
    work2 = np.empty_like(rhs2)
    work2[:, 0] = rhs2[:, 0] * invdy[0]
    for j in range(1, n):
        work2[:, j] = (rhs2[:, j] - oy * work2[:, j - 1]) * invdy[j]
    out = np.zeros_like(psi)
    inner = out[1:-1, 1:-1]
    inner[:, n - 1] = work2[:, n - 1]
    for j in range(n - 2, -1, -1):
        inner[:, j] = work2[:, j] - cpy[j] * inner[:, j + 1]
    return out
