"""Experiment runners behind ``nvscope run``.

Each runner returns a :class:`Outcome`: the swept axis, the P0 columns
written to CSV and the derived quantities stored in ``results.json``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import simulator as sim
from ..analysis import (
    DipError,
    FitError,
    find_dip,
    fit_damped_sinusoid,
    nspin_curve,
    predict_fp,
    reconstruct_frequency,
    spectrum,
)
from .config import grid


@dataclass
class Outcome:
    axis_name: str
    axis: np.ndarray
    columns: dict          # column name -> values, CSV order
    derived: dict = field(default_factory=dict)
    xlabel: str = ""


def _f0_f1(system, peaks):
    """Assign two spectral peaks to (f0, f1) using the bare Larmor frequency."""
    f_l = abs(system.larmor(0))
    peaks = sorted(peaks, key=lambda f: abs(f - f_l))
    return peaks[0], peaks[1]


def xy_spectrum(system, e, readout, options, threads):
    f = grid(e["freq_MHz"])
    r = sim.sweep_tau(system, e["n_pulses"], 1.0 / (2 * f), readout, options, threads)
    derived = {}
    try:
        center, depth = find_dip(r)
        derived.update(dip_center_MHz=center, dip_depth=depth)
    except DipError as exc:
        derived["dip_error"] = str(exc)
    if system.n_nuclei:
        f0, f1 = system.branch_frequencies(0)
        derived["f_xy_MHz"] = 0.5 * (f0 + f1)
    return Outcome("freq_MHz", r.axis_values, {"p0": r.p0_values}, derived, "(2 tau)^-1 (MHz)")


def pulse_sweep(system, e, readout, options, threads):
    n = np.rint(grid(e["n_pulses"])).astype(int)
    r = sim.sweep_pulses(system, e["tau_us"], n, readout, options, threads)
    derived = {"p0_min": float(np.min(r.p0_values))}
    if "f_osc_kHz" in r.derived:
        derived["f_osc_kHz"] = r.derived["f_osc_kHz"]
    return Outcome("n_pulses", r.axis_values, {"p0": r.p0_values}, derived, "N")


def correlation(system, e, readout, options, threads):
    t = grid(e["t_corr_us"])
    r = sim.sweep_correlation(system, e["tau_us"], t, e.get("n_pulses", 32), readout, options,
                              threads)
    zone = e.get("zone")
    sp = spectrum(r.p0_values, t, zone_hint=zone)
    peaks = sp.peaks()
    derived = {"sample_rate_MHz": r.derived["sample_rate_MHz"], "nyquist_zone": zone or 0,
               "peaks_MHz": peaks}
    if len(peaks) >= 2 and system.n_nuclei:
        f0, f1 = _f0_f1(system, peaks)
        derived.update(f0_MHz=f0, f1_MHz=f1)
    return Outcome("t_corr_us", t, {"p0": r.p0_values}, derived, "t_corr (us)")


def b0_sweep(system, e, readout, options, threads):
    rows = sim.sweep_b0(system, grid(e["B0_mT"]), e.get("nucleus", 0))
    return Outcome("B0_mT", rows[:, 0], {"f0_MHz": rows[:, 1], "f1_MHz": rows[:, 2],
                                         "f_xy_MHz": rows[:, 3]}, {}, "B0 (mT)")


def pulsepol_spectrum(system, e, readout, options, threads):
    r = sim.sweep_pulsepol(system, grid(e["period_us"]), e.get("repeats", 20), readout, options,
                           threads)
    derived = {k: v for k, v in r.derived.items()}
    if "f_dip_MHz" in derived:
        derived["period_dip_us"] = 3.0 / derived["f_dip_MHz"]
    return Outcome("period_us", r.axis_values, {"p0": r.p0_values}, derived, "2 tau_pol (us)")


def polarization_transient(system, e, readout, options, threads):
    r = sim.polarization_transient(system, e["period_us"], e.get("n_blocks", 20),
                                   e.get("repeats", 20), readout, options)
    block = r.derived["block_duration_us"]
    derived = {"block_duration_us": block}
    try:
        contrast = system.contrast * (readout.contrast if readout.mode != "ideal" else 1.0)
        fit = nspin_curve(r.p0_values, block, contrast)
        derived.update(N_spin_sat=fit.N_spin_sat, t_c_us=fit.t_c, P0_sat=fit.P0_sat,
                       N_spin=fit.n_spin)
    except FitError as exc:
        derived["fit_error"] = str(exc)
    return Outcome("block", r.axis_values, {"p0": r.p0_values}, derived, "block n")


def rabi(system, e, readout, options, threads):
    r = sim.simulate_rabi(system, grid(e["T_rf_us"]), e["rf_freq_MHz"], e["rabi_kHz"],
                          e["period_us"], e.get("polarize_reps", 10), e.get("repeats", 20),
                          readout, options, threads)
    return Outcome("T_rf_us", r.axis_values, {"p0": r.p0_values}, dict(r.derived), "T_rf (us)")


def fid(system, e, readout, options, threads):
    args = (e["n_readouts"], e["tau_us"], e["t_L_us"], e["rf_freq_MHz"], e["rabi_kHz"],
            e["T_half_pi_us"], e["period_us"])
    kw = dict(polarize_reps=e.get("polarize_reps", 5), repeats=e.get("repeats", 20),
              readout=readout, options=options)
    polarity = e.get("polarity", "difference")
    if polarity == "difference":
        r = sim.simulate_fid_difference(system, *args, **kw)
        cols = {"p0_diff": r.p0_values, "p0_PolY": r.traces[0], "p0_PolX": r.traces[1]}
    else:
        r = sim.simulate_fid(system, polarity, *args, **kw)
        cols = {"p0": r.p0_values}
    t_L = e["t_L_us"]
    zone = e.get("zone")
    sp = spectrum(r.p0_values, t_L, zone_hint=zone)
    derived = {"sample_rate_MHz": 1.0 / t_L, "nyquist_zone": zone or 0, "peaks_MHz": sp.peaks()}
    if system.n_nuclei:
        f0, f1 = system.branch_frequencies(0)
        derived["f_p_MHz"] = predict_fp(f0, f1, 16 * e["tau_us"], t_L)
    try:
        fit = fit_damped_sinusoid(r.p0_values, t_L, e.get("n_components", 1))
        freqs = np.array([c.freq for c in fit.components])
        if zone:
            freqs = reconstruct_frequency(freqs, 1.0 / t_L, zone)
        order = np.argsort(freqs)
        derived["fit_freqs_MHz"] = freqs[order]
        derived["fit_amplitudes"] = [fit.components[k].amp for k in order]
    except FitError as exc:
        derived["fit_error"] = str(exc)
    return Outcome("t_us", r.axis_values, cols, derived, "t (us)")


RUNNERS = {
    "xy_spectrum": xy_spectrum,
    "pulse_sweep": pulse_sweep,
    "correlation": correlation,
    "b0_sweep": b0_sweep,
    "pulsepol_spectrum": pulsepol_spectrum,
    "polarization_transient": polarization_transient,
    "rabi": rabi,
    "fid": fid,
}
