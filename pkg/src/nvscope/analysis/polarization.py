"""Counting transferred nuclear polarization from a repeated-transfer transient."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit

from .fitting import FitError

TAIL_FRACTION = 0.25
SLOPE_THRESHOLD = 1e-3  # P0 change per block


@dataclass
class PolarizationFit:
    """Saturating fit ``N_spin(t) = N_spin_sat (1 - exp(-t / t_c))``.

    ``t`` and ``n_spin`` hold the cumulative curve the fit was made to.
    """

    N_spin_sat: float
    t_c: float  # us
    P0_sat: float
    t: np.ndarray = field(repr=False, default=None)
    n_spin: np.ndarray = field(repr=False, default=None)

    def model(self, t=None) -> np.ndarray:
        t = self.t if t is None else np.asarray(t, dtype=float)
        if not math.isfinite(self.t_c):
            return np.zeros_like(t)
        return self.N_spin_sat * (1.0 - np.exp(-t / self.t_c))


def _saturating(t, n_sat, t_c):
    return n_sat * (1.0 - np.exp(-t / t_c))


def nspin_curve(P0_series, block_duration: float, contrast: float = 1.0) -> PolarizationFit:
    """Cumulative number of flipped nuclear spins and its saturation fit.

    Each transfer block that flips a nuclear spin leaves the sensor in
    m_S = -1, so ``P0_sat - P0(n)`` is the polarization handed over by block
    ``n``. The saturated level is the mean of the tail (last quarter, at
    least two points), which must be flat to within 1e-3 per block.

    Parameters
    ----------
    P0_series : array_like
        P0 after each transfer block, block 1 first.
    block_duration : float
        Duration of one transfer block in us; block ``n`` ends at
        ``t = n * block_duration``.
    contrast : float
        Readout contrast dividing the P0 deficit (1 for an ideal sensor).
    """
    y = np.asarray(P0_series, dtype=float)
    if y.size < 6:
        raise FitError(f"need at least 6 blocks, got {y.size}")
    if not block_duration > 0:
        raise ValueError("block_duration must be positive")
    if not 0 < contrast <= 1:
        raise ValueError("contrast must lie in (0, 1]")
    m = max(2, math.ceil(TAIL_FRACTION * y.size))
    tail = y[-m:]
    slope = np.polyfit(np.arange(m, dtype=float), tail, 1)[0]
    if abs(slope) >= SLOPE_THRESHOLD:
        raise FitError("no saturation within the series",
                       {"tail_slope": float(slope), "tail_points": m})
    p_sat = float(tail.mean())
    n_spin = np.cumsum(p_sat - y) / contrast
    t = np.arange(1, y.size + 1) * block_duration
    if np.max(np.abs(n_spin)) < 1e-12:
        return PolarizationFit(0.0, math.inf, p_sat, t, n_spin)
    # seed: plateau from the tail, time constant from the first block
    n0 = max(float(np.mean(n_spin[-m:])), 1e-12)
    frac = min(max(n_spin[0] / n0, 1e-6), 1 - 1e-6)
    tc0 = -block_duration / math.log(1 - frac)
    try:
        (n_sat, t_c), _ = curve_fit(_saturating, t, n_spin, p0=(n0, tc0),
                                    bounds=([0.0, 1e-9], [np.inf, np.inf]), max_nfev=10000)
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"saturation fit failed: {exc}") from exc
    return PolarizationFit(float(n_sat), float(t_c), p_sat, t, n_spin)
