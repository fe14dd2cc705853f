"""Activation functions: quantum-tunnelling transmission, ReLU, Softmax.

The tunnelling activation is the transmission coefficient T(E) of a
particle incident on a rectangular potential barrier of height ``V0``
and thickness ``a``.  Everything is nondimensionalised with
``2m / hbar^2 = 1``, so the stationary wave equation reads
``-psi'' + V psi = E psi`` and the wavenumbers are ``k = sqrt(E)``
outside the barrier and ``kappa = sqrt(V0 - E)`` inside it.

For 0 < E < V0:   T = [1 + V0^2 sinh^2(kappa a) / (4 E (V0 - E))]^-1
For E > V0:       T = [1 + V0^2 sin^2(k' a) / (4 E (E - V0))]^-1,  k' = sqrt(E - V0)
For E <= 0:       T = 0 (no incident propagating wave)

Both branches are the same analytic function of u = V0 - E; a short
series around u = 0 keeps the evaluation well-conditioned at E = V0,
where T = [1 + V0 a^2 / 4]^-1.

A node's weighted sum ``v`` maps to the particle energy through
``E = g * v`` with gain ``g``, so the activation is T(g*v) and its
derivative is ``g * dT/dE``.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ActivationKind",
    "ActivationMode",
    "ActivationSpec",
    "qt_transmission",
    "qt_transmission_derivative",
    "qt_activation",
    "qt_activation_derivative",
    "relu",
    "relu_derivative",
    "softmax",
    "activate",
    "activate_derivative",
]

# Relative half-width of the series patch around E = V0.
_BRANCH_TOL = 1e-9
# Above this kappa*a the sinh would overflow; switch to the asymptotic form
# T ~ 16 E (V0 - E) / V0^2 * exp(-2 kappa a).
_SINH_GUARD = 350.0


class ActivationKind(enum.Enum):
    QT = "qt"
    RELU = "relu"


class ActivationMode(enum.Enum):
    DETERMINISTIC = "deterministic"
    STOCHASTIC = "stochastic"


@dataclass(frozen=True)
class ActivationSpec:
    """Hidden-layer activation choice plus the barrier physics constants.

    ``barrier_height`` (V0), ``barrier_thickness`` (a) and ``energy_gain``
    (g) are in nondimensional units and must be positive; they are
    ignored when ``kind`` is ReLU.
    """

    kind: ActivationKind = ActivationKind.QT
    barrier_height: float = 1.0
    barrier_thickness: float = 1.0
    energy_gain: float = 1.0
    mode: ActivationMode = ActivationMode.DETERMINISTIC

    def __post_init__(self):
        for name in ("barrier_height", "barrier_thickness", "energy_gain"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be a positive finite real, got {value!r}")
        if not isinstance(self.kind, ActivationKind):
            raise ValueError(f"kind must be an ActivationKind, got {self.kind!r}")
        if not isinstance(self.mode, ActivationMode):
            raise ValueError(f"mode must be an ActivationMode, got {self.mode!r}")


def _check_barrier(barrier_height, barrier_thickness):
    v0 = float(barrier_height)
    a = float(barrier_thickness)
    if not (math.isfinite(v0) and v0 > 0.0):
        raise ValueError(f"barrier height must be positive and finite, got {barrier_height!r}")
    if not (math.isfinite(a) and a > 0.0):
        raise ValueError(f"barrier thickness must be positive and finite, got {barrier_thickness!r}")
    return v0, a


def _check_energy(energy):
    e = np.asarray(energy, dtype=float)
    if not np.all(np.isfinite(e)):
        raise ValueError("energy must be finite")
    return e


def qt_transmission(energy, barrier_height, barrier_thickness):
    """Transmission probability through a rectangular barrier.

    Accepts a scalar or an array of energies; returns values in [0, 1].
    ``T(E <= 0) = 0``, T is continuous across E = V0 and tends to 1 as
    E -> infinity.
    """
    v0, a = _check_barrier(barrier_height, barrier_thickness)
    e = _check_energy(energy)
    scalar = e.ndim == 0
    e = np.atleast_1d(e).astype(float)

    t = np.zeros_like(e)
    u = v0 - e
    positive = e > 0.0

    near = positive & (np.abs(u) <= _BRANCH_TOL * v0)
    if near.any():
        uu = u[near]
        g = a * a * (1.0 + (a * a) * uu / 3.0 + 2.0 * a**4 * uu * uu / 45.0)
        t[near] = 1.0 / (1.0 + v0 * v0 * g / (4.0 * e[near]))

    below = positive & ~near & (u > 0.0)
    if below.any():
        uu = u[below]
        ee = e[below]
        z = a * np.sqrt(uu)
        tb = np.empty_like(z)
        deep = z > _SINH_GUARD
        if deep.any():
            tb[deep] = 16.0 * ee[deep] * uu[deep] / (v0 * v0) * np.exp(-2.0 * z[deep])
        shallow = ~deep
        if shallow.any():
            sh = np.sinh(z[shallow])
            tb[shallow] = 1.0 / (1.0 + v0 * v0 * sh * sh / (4.0 * ee[shallow] * uu[shallow]))
        t[below] = tb

    above = positive & ~near & (u < 0.0)
    if above.any():
        uu = e[above] - v0
        sn = np.sin(a * np.sqrt(uu))
        t[above] = 1.0 / (1.0 + v0 * v0 * sn * sn / (4.0 * e[above] * uu))

    return float(t[0]) if scalar else t


def qt_transmission_derivative(energy, barrier_height, barrier_thickness):
    """dT/dE of :func:`qt_transmission`; 0 for E <= 0.

    Writing T = 1 / (1 + S) with S = V0^2 G(u) / (4 E), u = V0 - E and
    G(u) = sinh^2(a sqrt(u)) / u (analytically continued through u <= 0),
    the derivative is dT/dE = V0^2 (E G'(u) + G(u)) T^2 / (4 E^2).
    """
    v0, a = _check_barrier(barrier_height, barrier_thickness)
    e = _check_energy(energy)
    scalar = e.ndim == 0
    e = np.atleast_1d(e).astype(float)

    d = np.zeros_like(e)
    u = v0 - e
    positive = e > 0.0

    near = positive & (np.abs(u) <= _BRANCH_TOL * v0)
    if near.any():
        uu = u[near]
        ee = e[near]
        g = a * a * (1.0 + (a * a) * uu / 3.0 + 2.0 * a**4 * uu * uu / 45.0)
        gp = a**4 / 3.0 + 4.0 * a**6 * uu / 45.0
        t = 1.0 / (1.0 + v0 * v0 * g / (4.0 * ee))
        d[near] = v0 * v0 * (ee * gp + g) * t * t / (4.0 * ee * ee)

    below = positive & ~near & (u > 0.0)
    if below.any():
        uu = u[below]
        ee = e[below]
        z = a * np.sqrt(uu)
        db = np.empty_like(z)
        deep = z > _SINH_GUARD
        if deep.any():
            expf = np.exp(-2.0 * z[deep])
            db[deep] = 16.0 / (v0 * v0) * expf * ((v0 - 2.0 * ee[deep]) + a * ee[deep] * np.sqrt(uu[deep]))
        shallow = ~deep
        if shallow.any():
            zs = z[shallow]
            us = uu[shallow]
            es = ee[shallow]
            sh = np.sinh(zs)
            ch = np.cosh(zs)
            g = sh * sh / us
            gp = (zs * sh * ch - sh * sh) / (us * us)
            t = 1.0 / (1.0 + v0 * v0 * g / (4.0 * es))
            db[shallow] = v0 * v0 * (es * gp + g) * t * t / (4.0 * es * es)
        d[below] = db

    above = positive & ~near & (u < 0.0)
    if above.any():
        uu = -u[above]  # E - V0 > 0
        ee = e[above]
        w = a * np.sqrt(uu)
        sn = np.sin(w)
        cs = np.cos(w)
        g = sn * sn / uu
        gp = (sn * sn - w * sn * cs) / (uu * uu)
        t = 1.0 / (1.0 + v0 * v0 * g / (4.0 * ee))
        d[above] = v0 * v0 * (ee * gp + g) * t * t / (4.0 * ee * ee)

    return float(d[0]) if scalar else d


def qt_activation(v, spec: ActivationSpec, rng: np.random.Generator | None = None):
    """Tunnelling activation of weighted sum(s) ``v``.

    Deterministic mode returns T(g*v).  Stochastic mode returns a 0/1
    Bernoulli sample with success probability T(g*v), drawn from ``rng``.
    """
    if spec.kind is not ActivationKind.QT:
        raise ValueError(f"activation spec has kind {spec.kind}, expected QT")
    t = qt_transmission(np.asarray(v, float) * spec.energy_gain, spec.barrier_height, spec.barrier_thickness)
    if spec.mode is ActivationMode.DETERMINISTIC:
        return t
    if rng is None:
        raise ValueError("stochastic activation mode requires a random generator")
    t = np.asarray(t, float)
    sample = (rng.random(size=t.shape) < t).astype(float)
    return float(sample[()]) if sample.ndim == 0 else sample


def qt_activation_derivative(v, spec: ActivationSpec):
    """Derivative of the deterministic transmission curve with respect to ``v``.

    This is also the derivative of the stochastic mode's expected value.
    """
    if spec.kind is not ActivationKind.QT:
        raise ValueError(f"activation spec has kind {spec.kind}, expected QT")
    g = spec.energy_gain
    return g * qt_transmission_derivative(np.asarray(v, float) * g, spec.barrier_height, spec.barrier_thickness)


def relu(v):
    return np.maximum(np.asarray(v, float), 0.0)


def relu_derivative(v):
    """1 for v > 0, else 0 (the subgradient at the kink is fixed to 0)."""
    return np.where(np.asarray(v, float) > 0.0, 1.0, 0.0)


def softmax(v):
    """Normalised exponentials of a finite real vector.

    The maximum entry is subtracted before exponentiating, so the result
    is shift-invariant and never overflows.
    """
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("softmax expects a non-empty 1-d vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError("softmax input must be finite")
    w = np.exp(arr - arr.max())
    return w / w.sum()


def activate(v, spec: ActivationSpec, rng: np.random.Generator | None = None):
    """Apply the hidden-layer activation selected by ``spec``."""
    if spec.kind is ActivationKind.RELU:
        return relu(v)
    return qt_activation(v, spec, rng)


def activate_derivative(v, spec: ActivationSpec):
    if spec.kind is ActivationKind.RELU:
        return relu_derivative(v)
    return qt_activation_derivative(v, spec)
