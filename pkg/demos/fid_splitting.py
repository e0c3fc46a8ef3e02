"""Undersampled free induction decay of a proton with and without a 15N partner."""

import numpy as np

from nvscope import presets
from nvscope.analysis import predict_fp, spectrum
from nvscope.constants import DEFAULT_CONSTANTS as C
from nvscope.simulator import simulate_fid_difference, simulate_rabi
from nvscope.spin import NuclearSpec, SpinSystem

period = 2.4702
rabi = simulate_rabi(presets.nv1(), np.linspace(0, 40, 41), presets.F_H, 57.7, period)
t_half = rabi.derived["T_half_pi_us"]
print(f"nuclear Rabi {rabi.derived['rabi_kHz']:.2f} kHz, pi/2 = {t_half:.3f} us")

h = NuclearSpec("H", C.gamma_H, presets.NV1_A_PAR, presets.NV1_A_PERP)
n = NuclearSpec("N", C.gamma_N15, 0.0, 0.0)
for d_zz in (0.0, 3.0):
    s = SpinSystem.from_larmor(presets.F_H, (h, n), nn_couplings=[(0, 1, d_zz)])
    f0, f1 = s.branch_frequencies(0)
    fp = predict_fp(f0, f1, 16 * presets.TAU_COHERENT, presets.FID_T_L)
    r = simulate_fid_difference(s, 1024, presets.TAU_COHERENT, presets.FID_T_L, presets.F_H,
                                57.7, t_half, period)
    sp = spectrum(r.p0_values, presets.FID_T_L, zone_hint=28)
    lines = ", ".join(f"{p:.6f}" for p in sp.peaks())
    print(f"d_zz = {d_zz} kHz: lines at {lines} MHz (f_p = {fp:.6f} MHz)")
