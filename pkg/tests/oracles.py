"""Independent numerical oracles used by the test suite.

These deliberately avoid the closed-form expressions used by the
library: transmission comes from matching plane-wave solutions of the
stationary wave equation across the barrier (a small linear solve), and
the 2D spectrum oracle is the O(n^4) DFT summation.
"""

import numpy as np


def transfer_matrix_transmission(energy, barrier_height, barrier_thickness):
    """Transmission through the rectangular barrier by wavefunction matching.

    Solves for (r, A, B, t) in
        x < 0:       exp(ikx) + r exp(-ikx)
        0 <= x <= a: A exp(qx) + B exp(-qx)
        x > a:       t exp(ik(x - a))
    with continuity of psi and psi' at both interfaces (2m/hbar^2 = 1,
    so q = sqrt(V0 - E) continues to an imaginary value above the
    barrier), and returns |t|^2.
    """
    if energy <= 0.0:
        return 0.0
    k = np.sqrt(complex(energy))
    q = np.sqrt(complex(barrier_height - energy))
    a = barrier_thickness
    system = np.array(
        [
            [1.0, -1.0, -1.0, 0.0],
            [-1j * k, -q, q, 0.0],
            [0.0, np.exp(q * a), np.exp(-q * a), -1.0],
            [0.0, q * np.exp(q * a), -q * np.exp(-q * a), -1j * k],
        ],
        dtype=complex,
    )
    rhs = np.array([-1.0, -1j * k, 0.0, 0.0], dtype=complex)
    _, _, _, t = np.linalg.solve(system, rhs)
    return float(abs(t) ** 2)


def brute_force_dft2(matrix):
    """Direct O(n^4) evaluation of the 2D DFT (no FFT)."""
    arr = np.asarray(matrix, dtype=complex)
    rows, cols = arr.shape
    out = np.zeros((rows, cols), dtype=complex)
    for u in range(rows):
        for v in range(cols):
            total = 0.0 + 0.0j
            for m in range(rows):
                for n in range(cols):
                    total += arr[m, n] * np.exp(-2j * np.pi * (u * m / rows + v * n / cols))
            out[u, v] = total
    return out


def central_difference(fn, x, h=1e-6):
    return (fn(x + h) - fn(x - h)) / (2.0 * h)
