"""Builders for the sequences used in single-nuclear-spin NV experiments."""

from __future__ import annotations

from .ir import (
    HALF_PI,
    PI,
    Block,
    Delay,
    LaserInit,
    LaserRead,
    MwPulse,
    ParameterError,
    PulseProgram,
    RfPulse,
    TimingError,
)

XY16_PHASES = ("X", "Y", "X", "Y", "Y", "X", "Y", "X",
               "-X", "-Y", "-X", "-Y", "-Y", "-X", "-Y", "-X")

# PolY unit, as (kind, axis) with kind "h" = pi/2, "p" = pi, "d" = tau_pol/4 delay
POLY_PATTERN = (
    ("h", "Y"), ("d", None), ("p", "-X"), ("d", None), ("h", "Y"),
    ("h", "X"), ("d", None), ("p", "Y"), ("d", None), ("h", "X"),
    ("h", "Y"), ("d", None), ("p", "-X"), ("d", None), ("h", "Y"),
    ("h", "X"), ("d", None), ("p", "Y"), ("d", None), ("h", "X"),
)


def _fmt(x: float) -> str:
    return repr(float(x))


def xy16_unit(tau: float) -> tuple:
    """One XY16 cycle, tau/2 edges included so that cycles concatenate evenly."""
    out = [Delay(tau / 2)]
    for k, axis in enumerate(XY16_PHASES):
        out.append(MwPulse(axis, PI))
        out.append(Delay(tau / 2 if k == 15 else tau))
    return tuple(out)


def xy16_block(n: int, tau: float) -> Block:
    if not isinstance(n, int) or n <= 0 or n % 16:
        raise ParameterError(f"XY16-N needs N to be a positive multiple of 16, got {n!r}")
    if not tau > 0:
        raise ParameterError(f"tau must be positive, got {tau!r}")
    return Block(xy16_unit(tau), n // 16, f"XY16-{n} t={_fmt(tau)}")


def build_xy16(n: int, tau: float) -> PulseProgram:
    """Bare XY16-N decoupling train: ``n`` pi pulses, total duration ``n * tau``."""
    return PulseProgram((xy16_block(n, tau),), name="xy16", params=(("n", n), ("tau", tau)))


def build_xy16_readout(n: int, tau: float) -> PulseProgram:
    """L--X/2--(XY16-N)--(-X/2)--L_RO.

    The closing projection pulse has the opposite phase to the opening one,
    so an unperturbed echo is mapped back onto m_S = 0 and the NMR resonance
    shows up as a dip in P0. The readout axis is X.
    """
    els = (LaserInit(), MwPulse("X", HALF_PI), xy16_block(n, tau),
           MwPulse("-X", HALF_PI), LaserRead())
    return PulseProgram(els, name="xy16_readout", params=(("n", n), ("tau", tau)),
                        readout_axis="X")


def build_correlation(tau: float, t_corr: float, n: int = 32) -> PulseProgram:
    """L--X/2--(XY16-32)--Y/2--t_corr--Y/2--(XY16-32)--X/2--L_RO.

    The correlation delay is a storage interval: the sensor coherence is
    taken to be lost during it, only the population survives.
    """
    if not t_corr >= 0:
        raise ParameterError(f"t_corr must be non-negative, got {t_corr!r}")
    els = [LaserInit(), MwPulse("X", HALF_PI), xy16_block(n, tau), MwPulse("Y", HALF_PI)]
    els.append(Delay(t_corr, dephase=True))
    els += [MwPulse("Y", HALF_PI), xy16_block(n, tau), MwPulse("X", HALF_PI), LaserRead()]
    return PulseProgram(els, name="correlation",
                        params=(("n", n), ("tau", tau), ("t_corr", t_corr)), readout_axis="X")


def pulsepol_unit(tau_pol: float, variant: str = "PolY") -> Block:
    if not tau_pol > 0:
        raise ParameterError(f"tau_pol must be positive, got {tau_pol!r}")
    if variant not in ("PolY", "PolX"):
        raise ParameterError(f"variant must be PolY or PolX, got {variant!r}")
    els = []
    for kind, axis in POLY_PATTERN:
        if kind == "d":
            els.append(Delay(tau_pol / 4))
        else:
            els.append(MwPulse(axis, HALF_PI if kind == "h" else PI))
    if variant == "PolX":
        els.reverse()
    return Block(tuple(els), 1, f"{variant} tau={_fmt(tau_pol)}")


def pulsepol_block(tau_pol: float, variant: str = "PolY", repeats: int = 20) -> Block:
    if not isinstance(repeats, int) or repeats < 1:
        raise ParameterError(f"repeats must be a positive integer, got {repeats!r}")
    return Block((pulsepol_unit(tau_pol, variant),), repeats)


def build_pulsepol(tau_pol: float, variant: str = "PolY", repeats: int = 20) -> PulseProgram:
    """(PolY)^repeats or (PolX)^repeats; each unit has 2*tau_pol of free evolution."""
    return PulseProgram((pulsepol_block(tau_pol, variant, repeats),), name="pulsepol",
                        params=(("tau_pol", tau_pol), ("variant", variant), ("repeats", repeats)))


def build_pulsepol_spectrum_point(tau_pol: float, repeats: int = 20) -> PulseProgram:
    """(PolX)^20--L--(PolY)^20--L_RO, one point of a PulsePol spectrum."""
    els = (pulsepol_block(tau_pol, "PolX", repeats), LaserInit(),
           pulsepol_block(tau_pol, "PolY", repeats), LaserRead())
    return PulseProgram(els, name="pulsepol_spectrum",
                        params=(("tau_pol", tau_pol), ("repeats", repeats)))


def build_polarization_transient(tau_pol: float, n_blocks: int = 20,
                                 repeats: int = 20) -> PulseProgram:
    """[(PolX)^20--L]^n--[(PolY)^20--L_RO]^n."""
    els = (Block((pulsepol_block(tau_pol, "PolX", repeats), LaserInit()), n_blocks),
           Block((pulsepol_block(tau_pol, "PolY", repeats), LaserRead()), n_blocks))
    return PulseProgram(els, name="polarization_transient",
                        params=(("tau_pol", tau_pol), ("n_blocks", n_blocks), ("repeats", repeats)))


def build_rabi(polarize_reps: int, T_rf: float, rf_freq: float, rabi: float,
               tau_pol: float, repeats: int = 20, rf_phase: float = 0.0) -> PulseProgram:
    """[(PolY)^20--L]^k--T_rf--[(PolY)^20--L_RO]^k."""
    if not T_rf >= 0:
        raise ParameterError(f"T_rf must be non-negative, got {T_rf!r}")
    els = [Block((pulsepol_block(tau_pol, "PolY", repeats), LaserInit()), polarize_reps)]
    if T_rf > 0:
        els.append(RfPulse(rf_freq, rf_phase, T_rf, rabi))
    els.append(Block((pulsepol_block(tau_pol, "PolY", repeats), LaserRead()), polarize_reps))
    return PulseProgram(els, name="rabi",
                        params=(("T_rf", T_rf), ("rf_freq", rf_freq), ("rabi", rabi),
                                ("tau_pol", tau_pol)))


def build_fid(polarity: str, T_half_pi: float, n_readouts: int, tau: float, t_L: float,
              rf_freq: float, rabi: float, tau_pol: float, polarize_reps: int = 5,
              repeats: int = 20, n_xy: int = 16, rf_phase: float = 0.0) -> PulseProgram:
    """[(PolY/X)^20--L]^5--T_rf,pi/2--[X/2--(XY16-16)--Y/2--L_RO--pad]^n.

    ``pad`` is chosen so that successive X/2 pulses are exactly ``t_L``
    apart; the readout pulse is Y/2, which makes the detection
    phase-sensitive.
    """
    xy = xy16_block(n_xy, tau)
    t_s = n_xy * tau
    if t_L < t_s:
        raise TimingError(f"sampling interval t_L={t_L} us shorter than sensing time {t_s} us")
    if not isinstance(n_readouts, int) or n_readouts < 1:
        raise ParameterError(f"n_readouts must be a positive integer, got {n_readouts!r}")
    detect = [MwPulse("X", HALF_PI), xy, MwPulse("Y", HALF_PI), LaserRead()]
    pad = t_L - t_s
    if pad > 0:
        detect.append(Delay(pad))
    els = [Block((pulsepol_block(tau_pol, polarity, repeats), LaserInit()), polarize_reps)]
    if T_half_pi > 0:
        els.append(RfPulse(rf_freq, rf_phase, T_half_pi, rabi))
    els.append(Block(tuple(detect), n_readouts))
    return PulseProgram(els, name="fid",
                        params=(("polarity", polarity), ("T_half_pi", T_half_pi),
                                ("n_readouts", n_readouts), ("tau", tau), ("t_L", t_L)),
                        readout_axis="Y")
