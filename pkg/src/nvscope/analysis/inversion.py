"""From measured frequencies to hyperfine constants and nuclear position."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .. import forward
from ..constants import DEFAULT_CONSTANTS, PhysicalConstants
from ..spin import DomainError, invert_dipolar
from ..spin import nn_coupling_estimate  # noqa: F401  (re-exported)
from ..sequence.ir import TimingError


class InversionError(ValueError):
    pass


AGREEMENT_KHZ = 0.5


@dataclass
class HyperfineEstimate:
    A_par: float   # kHz
    A_perp: float  # kHz
    inputs: dict = field(default_factory=dict)
    closed_form: tuple = ()
    numerical: tuple = ()


def hyperfine_closed_form(f0, f1, f_osc, tau):
    """(A_par, A_perp) in kHz from the conditional-rotation relation.

    One XY unit (tau/2 - pi - tau - pi - tau/2) rotates the nucleus by phi
    about a branch-dependent axis, with

        cos(phi/2) = cos(a) cos(b) - m_z sin(a) sin(b),  a = pi f0 tau, b = pi f1 tau

    where m_z = (f0 + A_par) / f1 is the cosine between the two branch
    quantization axes. The signal oscillates at f_osc = psi / (4 pi tau) with
    psi = min(phi, 2 pi - phi), so m_z follows from the measured quantities.
    Of the two candidates for phi the one with the larger m_z (weaker
    tilt of the m_S = -1 axis) is returned.
    """
    if f_osc == 0:
        # no observable oscillation: parallel branch axes
        return (f1 - f0) * 1e3, 0.0
    a, b = math.pi * f0 * tau, math.pi * f1 * tau
    h = 2 * math.pi * tau * f_osc * 1e-3   # psi / 2
    if h > math.pi / 2:
        raise InversionError(f"f_osc = {f_osc} kHz exceeds the unit rotation range at tau = {tau}")
    den = math.sin(a) * math.sin(b)
    if abs(den) < 1e-12:
        raise InversionError("sin(pi f0 tau) sin(pi f1 tau) vanishes: relation is singular")
    s_ab = a + b
    # 1 - m_z = (cos(phi/2) - cos(a + b)) / (sin a sin b), cancellation-free,
    # for cos(phi/2) = +cos(h) (phi = psi) and -cos(h) (phi = 2 pi - psi)
    candidates = (
        -2 * math.sin((h + s_ab) / 2) * math.sin((h - s_ab) / 2) / den,
        -2 * math.cos((h + s_ab) / 2) * math.cos((h - s_ab) / 2) / den,
    )
    valid = [c for c in candidates if -1e-12 <= c <= 2.0 + 1e-12]
    if not valid:
        raise InversionError("inputs imply an axis cosine outside [-1, 1]: no real solution")
    one_minus = min(valid)
    m_z = 1.0 - one_minus
    sin2 = max(one_minus * (2.0 - one_minus), 0.0)
    f1k = f1 * 1e3
    return m_z * f1k - f0 * 1e3, f1k * math.sqrt(sin2)


def hyperfine_numerical(f0, f1, f_osc, tau, start):
    """Root-find (A_par, A_perp) against the exact propagator forward model."""
    f0k = f0 * 1e3

    def resid(x):
        a_par, a_perp = x
        f1_model = math.hypot(f0k + a_par, a_perp) * 1e-3
        fo = forward.coherent_driving_frequency(f0, a_par, a_perp, tau)
        return [(f1_model - f1) * 1e3, fo - f_osc]

    x0 = [start[0], max(start[1], 1e-6)]
    sol = least_squares(resid, x0, bounds=([-np.inf, 0.0], [np.inf, np.inf]),
                        xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=2000)
    if not sol.success or np.max(np.abs(sol.fun)) > 1e-6:
        raise InversionError(f"numerical inversion failed: {sol.message}")
    return float(sol.x[0]), float(sol.x[1])


def hyperfine_from_correlation(f0: float, f1: float, f_osc: float, tau: float,
                               f_H: float = None) -> HyperfineEstimate:
    """Hyperfine constants from correlation frequencies and coherent driving.

    Parameters
    ----------
    f0, f1 : float
        Nuclear precession frequencies (MHz) with the sensor in m_S = 0 and -1.
    f_osc : float
        Oscillation frequency (kHz) of the XY signal against N*tau.
    tau : float
        Pulse spacing (us) used for the f_osc measurement.
    f_H : float, optional
        Nominal Larmor frequency, recorded only; the measured f0 serves as the
        bare Larmor frequency.

    The numerical path is authoritative; both paths must agree within 0.5 kHz.
    """
    if not (f0 > 0 and f1 > 0 and tau > 0 and f_osc >= 0):
        raise InversionError("f0, f1, tau must be positive and f_osc non-negative")
    closed = hyperfine_closed_form(f0, f1, f_osc, tau)
    if f_osc == 0:
        numerical = closed
    else:
        numerical = hyperfine_numerical(f0, f1, f_osc, tau, closed)
    if max(abs(closed[0] - numerical[0]), abs(closed[1] - numerical[1])) > AGREEMENT_KHZ:
        raise InversionError(
            f"closed-form {closed} and numerical {numerical} inversions disagree "
            f"by more than {AGREEMENT_KHZ} kHz")
    inputs = dict(f0=f0, f1=f1, f_osc=f_osc, tau=tau, f_H=f_H)
    return HyperfineEstimate(numerical[0], numerical[1], inputs, closed, numerical)


def predict_fp(f0: float, f1: float, t_s: float, t_L: float) -> float:
    """Duty-cycle weighted precession frequency (MHz) during interleaved readout.

    For a fraction t_s/t_L of each sampling interval the sensor is in a
    superposition (nucleus precesses at (f0+f1)/2 on average); for the rest
    it sits in m_S = 0 (nucleus precesses at f0).
    """
    if not 0 < t_s <= t_L:
        raise TimingError(f"need 0 < t_s <= t_L, got t_s={t_s}, t_L={t_L}")
    return (f0 + f1) / 2 * (t_s / t_L) + f0 * (t_L - t_s) / t_L


@dataclass
class Localization:
    r: float      # nm
    theta: float  # deg
    chain: dict = field(default_factory=dict)


def localize(estimate: HyperfineEstimate, constants: PhysicalConstants = DEFAULT_CONSTANTS,
             gamma_nucleus: float = None, provenance: dict = None) -> Localization:
    """Distance and polar angle of the nucleus, assuming a point dipole."""
    gamma = constants.gamma_H if gamma_nucleus is None else gamma_nucleus
    try:
        r, theta = invert_dipolar(constants, estimate.A_par, estimate.A_perp,
                                  constants.gamma_e, gamma)
    except DomainError as exc:
        raise InversionError(str(exc)) from exc
    chain = dict(provenance or {})
    chain.update(frequencies=estimate.inputs,
                 hyperfine={"A_par_kHz": estimate.A_par, "A_perp_kHz": estimate.A_perp},
                 geometry={"r_nm": r, "theta_deg": theta})
    return Localization(r, theta, chain)
