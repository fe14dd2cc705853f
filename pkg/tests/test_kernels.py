import os
import subprocess
import sys

import numpy as np
import pytest

from qtnn import kernels


def dense_system(n, r):
    matrix = np.zeros((n, n), dtype=complex)
    np.fill_diagonal(matrix, 1.0 + 2.0j * r)
    idx = np.arange(n - 1)
    matrix[idx, idx + 1] = -1.0j * r
    matrix[idx + 1, idx] = -1.0j * r
    return matrix


class TestPrepareTridiag:
    @pytest.mark.parametrize("n,r", [(5, 0.25), (64, 2.5), (3, -0.7)])
    def test_factors_solve_the_system(self, n, r):
        cp, invden = kernels.prepare_tridiag(n, r)
        rng = np.random.default_rng(0)
        rhs = rng.normal(size=n) + 1j * rng.normal(size=n)
        off = -1.0j * r
        work = np.empty(n, dtype=complex)
        work[0] = rhs[0] * invden[0]
        for i in range(1, n):
            work[i] = (rhs[i] - off * work[i - 1]) * invden[i]
        x = np.empty(n, dtype=complex)
        x[-1] = work[-1]
        for i in range(n - 2, -1, -1):
            x[i] = work[i] - cp[i] * x[i + 1]
        expected = np.linalg.solve(dense_system(n, r), rhs)
        assert np.abs(x - expected).max() < 1e-12

    def test_size_validation(self):
        with pytest.raises(ValueError):
            kernels.prepare_tridiag(0, 1.0)


def random_field(nx, ny, seed=1):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=(nx, ny)) + 1j * rng.normal(size=(nx, ny))
    psi[0, :] = psi[-1, :] = 0.0
    psi[:, 0] = psi[:, -1] = 0.0
    return psi


class TestKineticStep:
    def test_backends_agree(self):
        backends = kernels.available_backends()
        if "cython" not in backends:
            pytest.skip("compiled kernel not built in this environment")
        nx, ny = 40, 56
        rx, ry = 0.25, 0.4
        cpx, invdx = kernels.prepare_tridiag(nx - 2, rx)
        cpy, invdy = kernels.prepare_tridiag(ny - 2, ry)
        psi = random_field(nx, ny)
        out_py = backends["python"](psi, rx, ry, cpx, invdx, cpy, invdy)
        out_cy = backends["cython"](psi, rx, ry, cpx, invdx, cpy, invdy)
        assert np.abs(out_py - out_cy).max() < 1e-13

    def test_zero_boundary_ring_preserved(self):
        nx, ny = 24, 24
        rx = ry = 0.3
        cpx, invdx = kernels.prepare_tridiag(nx - 2, rx)
        cpy, invdy = kernels.prepare_tridiag(ny - 2, ry)
        out = kernels.kinetic_step(random_field(nx, ny), rx, ry, cpx, invdx, cpy, invdy)
        assert np.all(out[0, :] == 0) and np.all(out[-1, :] == 0)
        assert np.all(out[:, 0] == 0) and np.all(out[:, -1] == 0)

    def test_matches_direct_cayley_solve(self):
        # one half-step at a time against dense linear algebra
        nx, ny = 18, 14
        rx, ry = 0.21, 0.17
        cpx, invdx = kernels.prepare_tridiag(nx - 2, rx)
        cpy, invdy = kernels.prepare_tridiag(ny - 2, ry)
        psi = random_field(nx, ny, seed=7)
        inner = psi[1:-1, 1:-1]

        ay = dense_system(ny - 2, ry)
        ax = dense_system(nx - 2, rx)
        rhs1 = inner @ (2.0 * np.eye(ny - 2) - ay).T        # (I - i ry Ty) along y
        half = np.linalg.solve(ax, rhs1)                    # x-implicit
        rhs2 = (2.0 * np.eye(nx - 2) - ax) @ half           # (I - i rx Tx) along x
        expected = np.linalg.solve(ay, rhs2.T).T            # y-implicit

        out = kernels.kinetic_step(psi, rx, ry, cpx, invdx, cpy, invdy)
        assert np.abs(out[1:-1, 1:-1] - expected).max() < 1e-12

    def test_pure_python_env_override(self):
        env = dict(os.environ, QTNN_PURE_PYTHON="1")
        result = subprocess.run(
            [sys.executable, "-c", "from qtnn import kernels; print(kernels.BACKEND)"],
            capture_output=True,
            text=True,
            env=env,
            check=True,
        )
        assert result.stdout.strip() == "python"
