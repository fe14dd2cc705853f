"""Backend selection for the hot ADI kernels.

The compiled Cython extension is used when it imported cleanly; setting
``QTNN_PURE_PYTHON=1`` (or a failed build) selects the NumPy fallback.
Both backends implement the identical algorithm; ``available_backends``
exposes them side by side for equivalence tests and benchmarks.
"""

import os

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:
    _ckernels = None

if os.environ.get("QTNN_PURE_PYTHON") or _ckernels is None:
    BACKEND = "python"
    kinetic_step = _pykernels.kinetic_step
else:
    BACKEND = "cython"
    kinetic_step = _ckernels.kinetic_step


def available_backends() -> dict:
    backends = {"python": _pykernels.kinetic_step}
    if _ckernels is not None:
        backends["cython"] = _ckernels.kinetic_step
    return backends


def prepare_tridiag(n: int, r: float):
    """LU factors of the tridiagonal matrix I + i r T along one axis.

    T is the (negative) second-difference stencil, so the matrix has
    diagonal ``1 + 2ir`` and off-diagonals ``-ir``.  Returns the
    super-diagonal multipliers and inverse pivots used by the Thomas
    recurrences in both backends.
    """
    if n < 1:
        raise ValueError("system size must be >= 1")
    diag = 1.0 + 2.0j * r
    off = -1.0j * r
    cp = np.empty(n, dtype=np.complex128)
    invden = np.empty(n, dtype=np.complex128)
    den = diag
    invden[0] = 1.0 / den
    cp[0] = off * invden[0]
    for i in range(1, n):
        den = diag - off * cp[i - 1]
        invden[i] = 1.0 / den
        cp[i] = off * invden[i]
    return cp, invden
