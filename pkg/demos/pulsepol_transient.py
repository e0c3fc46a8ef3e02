"""Polarization transfer with PulsePol and the count of flipped nuclei."""

import numpy as np

from nvscope import presets
from nvscope.analysis import nspin_curve
from nvscope.constants import DEFAULT_CONSTANTS as C
from nvscope.simulator import (
    SimulationOptions,
    polarization_transient,
    pulsepol_polarization,
    sweep_pulsepol,
)
from nvscope.spin import NuclearSpec, SpinSystem

system = presets.nv1()
res = sweep_pulsepol(system, 1 / np.linspace(0.398, 0.412, 57))
period = 3 / res.derived["f_dip_MHz"]
print(f"transfer dip at 3/(2 tau_pol) = {res.derived['f_dip_MHz']:.5f} MHz "
      f"(2 tau_pol = {period:.4f} us)")
for variant in ("PolY", "PolX"):
    iz = pulsepol_polarization(system, period / 2, variant)[0]
    print(f"{variant}: <Iz> = {iz:+.4f}")

for label, opts in (("ideal", SimulationOptions()),
                    ("2% depolarization per laser pulse",
                     SimulationOptions(nuclear_depolarization=0.02))):
    tr = polarization_transient(system, period, 20, options=opts)
    fit = nspin_curve(tr.p0_values, tr.derived["block_duration_us"])
    print(f"single proton, {label}: N_spin,sat = {fit.N_spin_sat:.3f}, t_c = {fit.t_c:.1f} us")

protons = tuple(NuclearSpec(f"H{k}", C.gamma_H, a, b)
                for k, (a, b) in enumerate([(-19.0, 22.9), (-12.0, 18.0), (-25.0, 15.0)]))
tr = polarization_transient(SpinSystem.from_larmor(presets.F_H, protons), period, 40)
fit = nspin_curve(tr.p0_values, tr.derived["block_duration_us"])
print(f"three protons: N_spin,sat = {fit.N_spin_sat:.3f}")
