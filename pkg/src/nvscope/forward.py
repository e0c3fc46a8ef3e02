"""Propagator-based forward models for a single nucleus under a decoupling train.

With ideal pi pulses the nucleus sees alternating branch Hamiltonians. One
period of the train (tau/2 - pi - tau - pi - tau/2) produces a rotation
``V0`` when the sensor starts in m_S = 0 and ``V1`` when it starts in
m_S = -1. Both are rotations by the same angle ``phi`` about axes ``n0`` and
``n1``; after K periods the sensor coherence is scaled by

    M = 1 - (1 - n0.n1) sin^2(K phi / 2)

so the signal oscillates with K at ``phi / 2pi`` cycles per period.
"""

from __future__ import annotations

import math

import numpy as np

from .constants import angular, khz_to_mhz
from .spin import SX, SY, SZ, propagator

_PAULI = (2 * SX, 2 * SY, 2 * SZ)


def _branch_h(f_L, A_par, A_perp):
    h0 = angular(f_L) * SZ
    h1 = angular(f_L + khz_to_mhz(A_par)) * SZ + angular(khz_to_mhz(A_perp)) * SX
    return h0, h1


def period_propagators(f_L: float, A_par: float, A_perp: float, tau: float):
    """(V0, V1) for one decoupling period of length ``2*tau``."""
    h0, h1 = _branch_h(f_L, A_par, A_perp)
    half0, half1 = propagator(h0, tau / 2), propagator(h1, tau / 2)
    full0, full1 = propagator(h0, tau), propagator(h1, tau)
    return half0 @ full1 @ half0, half1 @ full0 @ half1


def rotation_parameters(V: np.ndarray):
    """Angle in [0, 2pi] and unit axis of an SU(2) matrix."""
    c = float(np.clip(np.real(np.trace(V)) / 2, -1.0, 1.0))
    phi = 2.0 * math.acos(c)
    s = math.sin(phi / 2)
    if abs(s) < 1e-15:
        return phi, np.array([0.0, 0.0, 1.0])
    axis = np.array([float(np.real(1j * np.trace(p @ V))) / 2 for p in _PAULI]) / s
    return phi, axis / np.linalg.norm(axis)


def coherent_driving_frequency(f_L: float, A_par: float, A_perp: float, tau: float) -> float:
    """Oscillation frequency (kHz) of the XY-N signal versus time N*tau."""
    v0, _ = period_propagators(f_L, A_par, A_perp, tau)
    phi, _ = rotation_parameters(v0)
    phi = min(phi, 2 * math.pi - phi)
    return phi / (2 * math.pi * 2 * tau) * 1e3


def xy_signal(f_L: float, A_par: float, A_perp: float, tau: float, n: int) -> float:
    """P0 after L--X/2--(XY-n)--(-X/2)--L_RO for an unpolarised nucleus."""
    v0, v1 = period_propagators(f_L, A_par, A_perp, tau)
    k = n // 2
    m = np.real(np.trace(np.linalg.matrix_power(v0, k)
                         @ np.linalg.matrix_power(v1, k).conj().T)) / 2
    return 0.5 * (1.0 + m)
