"""Reference spin systems and timings of a single-proton NV sensor."""

from __future__ import annotations

from .constants import DEFAULT_CONSTANTS
from .spin import NuclearSpec, SpinSystem

F_H = 1.2239          # MHz, proton Larmor frequency
F0_MEASURED = 1.2234  # MHz
F1_MEASURED = 1.2046  # MHz
NV1_A_PAR = -19.0     # kHz
NV1_A_PERP = 22.9     # kHz
NV1_R = 1.44          # nm
NV1_THETA = 72.3      # deg
TAU_COHERENT = 0.4115  # us
F_OSC = 7.414          # kHz
POL_PERIOD = 2.4960    # us, 2 tau_pol
RF_RABI = 0.0577       # MHz
FID_TAU = 0.4115       # us
FID_T_L = 11.840       # us
FID_T_S = 6.584        # us


def proton(A_par: float = NV1_A_PAR, A_perp: float = NV1_A_PERP, label: str = "H") -> NuclearSpec:
    return NuclearSpec(label, DEFAULT_CONSTANTS.gamma_H, A_par, A_perp)


def nv1(f_H: float = F_H, **kw) -> SpinSystem:
    """Sensor with one proton at A_par = -19.0 kHz, A_perp = 22.9 kHz."""
    return SpinSystem.from_larmor(f_H, (proton(),), **kw)
