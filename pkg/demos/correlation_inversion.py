"""From an undersampled correlation trace to the position of a proton.

1. correlation spectroscopy sampled at 84.46 kHz (28th Nyquist zone)
2. f0, f1 from the spectrum, f_osc from a pulse-number sweep
3. hyperfine constants, then (r, theta) of the point dipole
"""

import numpy as np

from nvscope import presets
from nvscope.analysis import hyperfine_from_correlation, localize, spectrum
from nvscope.simulator import sweep_correlation, sweep_pulses

fs = 1 / presets.FID_T_L
system = presets.nv1()
t = np.arange(256) / fs
trace = sweep_correlation(system, presets.TAU_COHERENT, t)
sp = spectrum(trace.p0_values, t, zone_hint=28)
f1, f0 = sp.peaks()[-2:]
print(f"correlation lines: f0 = {f0:.6f} MHz, f1 = {f1:.6f} MHz, "
      f"split {1e3 * (f0 - f1):.2f} kHz")

tau = presets.TAU_COHERENT
f_osc = sweep_pulses(system, tau, np.arange(16, 657, 16)).derived["f_osc_kHz"]
est = hyperfine_from_correlation(f0, f1, f_osc, tau, presets.F_H)
print(f"f_osc = {f_osc:.3f} kHz -> A_par = {est.A_par:.2f} kHz, A_perp = {est.A_perp:.2f} kHz")

loc = localize(est)
print(f"proton at r = {loc.r:.3f} nm, theta = {loc.theta:.1f} deg")

# the measured values, taken as given
est = hyperfine_from_correlation(presets.F0_MEASURED, presets.F1_MEASURED, presets.F_OSC, tau)
loc = localize(est)
print(f"measured inputs: A = ({est.A_par:.2f}, {est.A_perp:.2f}) kHz, "
      f"r = {loc.r:.3f} nm, theta = {loc.theta:.1f} deg")
