"""Spin operators, NV-conditional nuclear Hamiltonians and dipolar geometry.

The sensor is the m_S = 0 / m_S = -1 doublet of the NV centre; index 0 of the
sensor factor is m_S = 0 and index 1 is m_S = -1. The joint Hilbert space is
``sensor (x) nucleus_0 (x) nucleus_1 (x) ...``.

In the rotating frame of the microwave drive and within the secular
approximation, the nuclear Hamiltonian is block diagonal in the sensor basis::

    H = |0><0| (x) H_0  +  |1><1| (x) H_1

with ``H_0`` and ``H_1`` returned by :func:`branch_hamiltonian`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Optional, Sequence

import numpy as np

from .constants import (
    DEFAULT_CONSTANTS,
    PhysicalConstants,
    angular,
    deg_to_rad,
    dipolar_prefactor,
    khz_to_mhz,
    larmor_frequency,
    rad_to_deg,
)

MAX_NUCLEI = 8

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10

SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2
ID2 = np.eye(2, dtype=complex)

PROJ0 = np.array([[1, 0], [0, 0]], dtype=complex)
PROJ1 = np.array([[0, 0], [0, 1]], dtype=complex)


class DomainError(ValueError):
    """Argument outside the physical domain of an operation."""


def embed(op: np.ndarray, index: int, n: int) -> np.ndarray:
    """Single-spin operator ``op`` acting on spin ``index`` of ``n`` spins-1/2."""
    factors = [ID2] * n
    factors[index] = op
    return reduce(np.kron, factors, np.eye(1, dtype=complex))


# ---------------------------------------------------------------------------
# System description
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NuclearSpec:
    """A spin-1/2 nucleus coupled to the sensor.

    Parameters
    ----------
    label : str
    gamma : float
        gamma/2pi in kHz/mT.
    A_par, A_perp : float
        Hyperfine components /2pi in kHz. ``A_perp`` is non-negative; its
        sign is absorbed into the choice of the nuclear x axis.
    geometry : (r_nm, theta_deg), optional
        Position relative to the NV axis. When given, the hyperfine
        components must match the point-dipole values.
    """

    label: str
    gamma: float
    A_par: float = 0.0
    A_perp: float = 0.0
    geometry: Optional[tuple] = None

    def __post_init__(self):
        if self.A_perp < 0:
            raise DomainError(f"A_perp must be non-negative, got {self.A_perp}")
        if self.geometry is not None:
            r, theta = self.geometry
            a_par, a_perp = dipolar_coupling(DEFAULT_CONSTANTS, r, theta,
                                             DEFAULT_CONSTANTS.gamma_e, self.gamma)
            scale = max(abs(a_par), abs(a_perp), 1e-300)
            if (abs(a_par - self.A_par) > 1e-9 * scale
                    or abs(a_perp - self.A_perp) > 1e-9 * scale):
                raise DomainError(
                    f"nucleus {self.label!r}: hyperfine ({self.A_par}, {self.A_perp}) kHz "
                    f"inconsistent with geometry r={r} nm, theta={theta} deg "
                    f"(expected ({a_par}, {a_perp}) kHz)")

    @classmethod
    def from_geometry(cls, label, gamma, r, theta, constants=DEFAULT_CONSTANTS):
        a_par, a_perp = dipolar_coupling(constants, r, theta, constants.gamma_e, gamma)
        return cls(label, gamma, a_par, a_perp, (float(r), float(theta)))


@dataclass(frozen=True)
class SpinSystem:
    """Sensor plus nuclei in a static field ``B0`` (mT) along the NV axis.

    ``nn_couplings`` holds ``(i, j, d_zz)`` triples with ``d_zz`` in kHz.
    """

    B0: float
    nuclei: tuple = ()
    nn_couplings: tuple = ()
    contrast: float = 1.0
    constants: PhysicalConstants = field(default=DEFAULT_CONSTANTS, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "nuclei", tuple(self.nuclei))
        object.__setattr__(self, "nn_couplings",
                           tuple((int(i), int(j), float(d)) for i, j, d in self.nn_couplings))
        if not self.B0 > 0:
            raise DomainError(f"B0 must be positive, got {self.B0!r} mT")
        if len(self.nuclei) > MAX_NUCLEI:
            raise DomainError(f"at most {MAX_NUCLEI} nuclei are supported, got {len(self.nuclei)}")
        if not 0.0 <= self.contrast <= 1.0:
            raise DomainError(f"contrast must lie in [0, 1], got {self.contrast}")
        n = len(self.nuclei)
        for i, j, _ in self.nn_couplings:
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise DomainError(f"invalid nuclear pair ({i}, {j}) for {n} nuclei")

    @classmethod
    def from_larmor(cls, f_H, nuclei=(), nn_couplings=(), contrast=1.0,
                    constants=DEFAULT_CONSTANTS):
        """Build a system whose proton Larmor frequency is ``f_H`` MHz."""
        return cls(f_H * 1e3 / constants.gamma_H, nuclei, nn_couplings, contrast, constants)

    @property
    def n_nuclei(self) -> int:
        return len(self.nuclei)

    @property
    def nuclear_dim(self) -> int:
        return 2 ** len(self.nuclei)

    @property
    def dim(self) -> int:
        return 2 * self.nuclear_dim

    def larmor(self, j: int) -> float:
        """Signed Larmor frequency of nucleus ``j`` in MHz."""
        return larmor_frequency(self.constants, self.nuclei[j].gamma, self.B0)

    def with_field(self, B0: float) -> "SpinSystem":
        return SpinSystem(B0, self.nuclei, self.nn_couplings, self.contrast, self.constants)

    def branch_frequencies(self, j: int = 0) -> tuple:
        """Single-nucleus precession frequencies (f0, f1) of nucleus ``j``, MHz.

        Nuclear-nuclear couplings are ignored here; use the branch
        Hamiltonian spectra for the coupled problem.
        """
        nuc = self.nuclei[j]
        f_l = self.larmor(j)
        f1 = math.hypot(f_l + khz_to_mhz(nuc.A_par), khz_to_mhz(nuc.A_perp))
        return abs(f_l), f1


# ---------------------------------------------------------------------------
# Hamiltonians and propagators
# ---------------------------------------------------------------------------

def nuclear_operators(n: int):
    """Lists (Ix, Iy, Iz) of embedded operators for ``n`` nuclei."""
    return ([embed(SX, j, n) for j in range(n)],
            [embed(SY, j, n) for j in range(n)],
            [embed(SZ, j, n) for j in range(n)])


def total_iz(n: int) -> np.ndarray:
    d = 2 ** n
    out = np.zeros((d, d), dtype=complex)
    for op in nuclear_operators(n)[2]:
        out += op
    return out


def _nn_terms(system: SpinSystem, ix, iy, iz) -> np.ndarray:
    d = system.nuclear_dim
    out = np.zeros((d, d), dtype=complex)
    for i, j, d_zz in system.nn_couplings:
        w = angular(khz_to_mhz(d_zz))
        zz = iz[i] @ iz[j]
        if system.nuclei[i].gamma == system.nuclei[j].gamma:
            # homonuclear secular dipolar form
            out += w * (zz - 0.5 * (ix[i] @ ix[j] + iy[i] @ iy[j]))
        else:
            # heteronuclear pair: flip-flops are non-secular
            out += w * zz
    return out


def branch_hamiltonian(system: SpinSystem, ms: int) -> np.ndarray:
    """Nuclear Hamiltonian (rad/us) conditioned on the sensor state ``ms``.

    ``ms = 0``:  sum_j 2pi f_L,j Iz_j
    ``ms = -1``: sum_j 2pi [(f_L,j + A_par,j) Iz_j + A_perp,j Ix_j]

    plus the nuclear-nuclear terms on both branches.
    """
    if ms not in (0, -1):
        raise DomainError(f"ms must be 0 or -1, got {ms!r}")
    n = system.n_nuclei
    if n == 0:
        return np.zeros((1, 1), dtype=complex)
    ix, iy, iz = nuclear_operators(n)
    h = _nn_terms(system, ix, iy, iz)
    for j, nuc in enumerate(system.nuclei):
        f_l = system.larmor(j)
        if ms == 0:
            h = h + angular(f_l) * iz[j]
        else:
            h = h + angular(f_l + khz_to_mhz(nuc.A_par)) * iz[j] \
                  + angular(khz_to_mhz(nuc.A_perp)) * ix[j]
    return h


def full_hamiltonian(system: SpinSystem) -> np.ndarray:
    """Joint sensor-nuclear Hamiltonian (block diagonal in the sensor basis)."""
    return (np.kron(PROJ0, branch_hamiltonian(system, 0))
            + np.kron(PROJ1, branch_hamiltonian(system, -1)))


def hermiticity_error(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def unitarity_error(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


class Eigensystem:
    """Cached eigendecomposition of a Hermitian matrix for repeated propagation."""

    def __init__(self, H: np.ndarray):
        H = np.asarray(H, dtype=complex)
        scale = max(1.0, float(np.max(np.abs(H)))) if H.size else 1.0
        if hermiticity_error(H) > HERMITIAN_TOL * scale:
            raise DomainError("propagator requires a Hermitian matrix")
        self.evals, self.evecs = np.linalg.eigh(H)
        self._evecs_h = self.evecs.conj().T

    def propagator(self, t: float) -> np.ndarray:
        return (self.evecs * np.exp(-1j * self.evals * t)) @ self._evecs_h


def propagator(H: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i H t)`` by eigendecomposition; ``H`` in rad/us, ``t`` in us."""
    return Eigensystem(H).propagator(t)


# ---------------------------------------------------------------------------
# Point-dipole geometry
# ---------------------------------------------------------------------------

def dipolar_coupling(constants: PhysicalConstants, r: float, theta: float,
                     gamma_a: float, gamma_b: float) -> tuple:
    """Secular hyperfine components (A_par, A_perp) in kHz for a point dipole.

    ``r`` in nm, ``theta`` (polar angle from the NV axis) in degrees.
    A_par = P (3 cos^2 theta - 1) / r^3, A_perp = |P 3 sin theta cos theta| / r^3,
    with P the coupling prefactor at 1 nm.
    """
    if not r > 0:
        raise DomainError(f"distance must be positive, got {r!r} nm")
    if not 0.0 <= theta <= 180.0:
        raise DomainError(f"theta must lie in [0, 180] deg, got {theta!r}")
    p = dipolar_prefactor(constants, gamma_a, gamma_b) / r ** 3
    th = deg_to_rad(theta)
    c, s = math.cos(th), math.sin(th)
    return p * (3.0 * c * c - 1.0), abs(p * 3.0 * s * c)


def invert_dipolar(constants: PhysicalConstants, A_par: float, A_perp: float,
                   gamma_a: float, gamma_b: float) -> tuple:
    """Distance (nm) and polar angle (deg) reproducing (A_par, A_perp).

    theta and 180 - theta give identical couplings; the branch in [0, 90]
    is returned.
    """
    if A_perp < 0:
        raise DomainError(f"A_perp must be non-negative, got {A_perp}")
    if A_par == 0 and A_perp == 0:
        raise DomainError("no dipolar solution for vanishing coupling")
    p = dipolar_prefactor(constants, gamma_a, gamma_b)
    a = A_par / p          # = (3c^2 - 1) / r^3
    b = A_perp / abs(p)    # = 3 s c / r^3
    # tan(theta) is the positive root of b t^2 + 3 a t - 2 b = 0; written
    # without cancellation for either sign of a
    root = math.hypot(3.0 * a, math.sqrt(8.0) * b)
    if a >= 0:
        theta = math.atan2(4.0 * b, 3.0 * a + root)
    else:
        theta = math.atan2(root - 3.0 * a, 2.0 * b)
    c, s = math.cos(theta), math.sin(theta)
    g = math.hypot(3.0 * c * c - 1.0, 3.0 * s * c)
    r = (g / math.hypot(a, b)) ** (1.0 / 3.0)
    return r, rad_to_deg(theta)


def nn_coupling_estimate(constants: PhysicalConstants, distance: float,
                         gamma_a: float, gamma_b: float) -> float:
    """Point-dipole coupling magnitude in kHz at ``distance`` nm."""
    if not distance > 0:
        raise DomainError(f"distance must be positive, got {distance!r} nm")
    return abs(dipolar_prefactor(constants, gamma_a, gamma_b)) / distance ** 3
