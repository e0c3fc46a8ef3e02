"""Physical constants and unit conversions.

Working units throughout the package:

* frequency: MHz (hyperfine constants in kHz at API boundaries)
* time: microseconds
* magnetic field: mT
* angles: degrees at API boundaries, radians internally

With MHz and microseconds the angular frequency of a Hamiltonian term is
simply ``2*pi*f`` in rad/us, so propagators need no further scaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    """Immutable constant set.

    Gyromagnetic ratios are stored as gamma/2pi in kHz/mT, which is the same
    number as MHz/T. ``gamma_N15`` is negative; it follows from the 15N
    magnetic moment -0.2831888 nuclear magnetons (CODATA/NIST) with I = 1/2:
    gamma/2pi = 2 * mu * (mu_N/h) = 2 * (-0.2831888) * 7.6225932 MHz/T.
    """

    gamma_H: float = 42.577
    gamma_e: float = 28.0e3
    gamma_N15: float = -4.31727
    gamma_C13: float = 10.7084
    hbar: float = 1.054571817e-34
    h: float = 6.62607015e-34
    mu0: float = 1.25663706212e-6


DEFAULT_CONSTANTS = PhysicalConstants()


def khz_to_mhz(value):
    return value * 1e-3


def mhz_to_khz(value):
    return value * 1e3


def deg_to_rad(value):
    return value * math.pi / 180.0


def rad_to_deg(value):
    return value * 180.0 / math.pi


def angular(f_mhz):
    """Angular frequency in rad/us for a frequency in MHz."""
    return 2.0 * math.pi * f_mhz


def larmor_frequency(constants: PhysicalConstants, gamma: float, B0: float) -> float:
    """Larmor frequency in MHz for ``gamma`` (kHz/mT) in a field ``B0`` (mT).

    The sign of ``gamma`` is kept, so negative-gamma nuclei precess with a
    negative frequency in the Hamiltonian convention used here.
    """
    if not B0 > 0:
        raise ValueError(f"B0 must be positive, got {B0!r} mT")
    return gamma * B0 * 1e-3


def dipolar_prefactor(constants: PhysicalConstants, gamma_a: float, gamma_b: float) -> float:
    """Point-dipole coupling at 1 nm, in kHz.

    Equals (mu0/4pi) * hbar * gamma_a * gamma_b / (2pi r^3) with the gammas in
    rad/s/T, which is the same as (mu0/4pi) * h * (gamma_a/2pi) * (gamma_b/2pi)
    / (h r^3). Signed by the product of the gyromagnetic ratios.
    """
    ga = gamma_a * 1e6 * 2.0 * math.pi  # kHz/mT = MHz/T -> rad/s/T
    gb = gamma_b * 1e6 * 2.0 * math.pi
    r3 = 1e-27
    hz = constants.mu0 / (4.0 * math.pi) * constants.hbar * ga * gb / (2.0 * math.pi * r3)
    return hz * 1e-3
