"""NMR spectrum of a single proton seen through an XY16-64 filter.

Sweeps the filter frequency 1/(2 tau) across the proton window, locates the
dip, then fixes tau on resonance and sweeps the pulse number to show the
coherent conditional rotation of the nucleus.
"""

import numpy as np

from nvscope import presets
from nvscope.analysis import find_dip
from nvscope.simulator import sweep_pulses, sweep_tau

system = presets.nv1()
f0, f1 = system.branch_frequencies()
print(f"branch frequencies f0 = {f0:.6f} MHz, f1 = {f1:.6f} MHz")

# longer trains narrow the line and pull the dip onto (f0 + f1)/2
for n, step in ((64, 0.0005), (256, 0.0001)):
    f = np.arange(1.19, 1.25, step)
    center, depth = find_dip(sweep_tau(system, n, 1 / (2 * f)))
    print(f"XY16-{n:<3d} dip at {center:.5f} MHz, depth {depth:.3f} "
          f"((f0 + f1)/2 = {(f0 + f1) / 2:.5f})")

res = sweep_pulses(system, presets.TAU_COHERENT, np.arange(16, 657, 16))
print(f"coherent driving at tau = {presets.TAU_COHERENT} us: "
      f"f_osc = {res.derived['f_osc_kHz']:.3f} kHz, min P0 = {res.p0_values.min():.3f}")
