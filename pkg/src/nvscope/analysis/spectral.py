"""Spectra of sampled traces, Nyquist-zone mapping and dip location."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import signal


class SpectrumError(ValueError):
    pass


class DipError(ValueError):
    pass


@dataclass
class Spectrum:
    """Magnitude spectrum.

    ``freqs`` are true frequencies (MHz, ascending) after mapping out of
    Nyquist zone ``nyquist_zone``; zone 0 means no aliasing assumed.
    """

    freqs: np.ndarray
    magnitudes: np.ndarray
    nyquist_zone: int
    sample_rate: float

    def peaks(self, threshold: float = 0.2, min_separation: int = 2) -> np.ndarray:
        return find_peaks(self.freqs, self.magnitudes, threshold, min_separation)


def alias_frequency(f: float, sample_rate: float):
    """(zone, baseband alias) of a tone at ``f`` sampled at ``sample_rate``."""
    half = sample_rate / 2
    zone = int(math.floor(f / half))
    if zone % 2 == 0:
        return zone, f - (zone // 2) * sample_rate
    return zone, ((zone + 1) // 2) * sample_rate - f


def reconstruct_frequency(f_alias, sample_rate: float, zone: int):
    """Inverse of :func:`alias_frequency` for a known zone."""
    f_alias = np.asarray(f_alias, dtype=float)
    if zone % 2 == 0:
        return (zone // 2) * sample_rate + f_alias
    return ((zone + 1) // 2) * sample_rate - f_alias


def _sample_step(dt) -> float:
    dt_arr = np.atleast_1d(np.asarray(dt, dtype=float))
    if dt_arr.size == 1:
        step = float(dt_arr[0])
    else:
        steps = np.diff(dt_arr)
        step = float(steps[0])
        if np.max(np.abs(steps - step)) > 1e-9 * abs(step):
            raise SpectrumError("sampling is not uniform")
    if not step > 0:
        raise SpectrumError(f"sample spacing must be positive, got {step}")
    return step


def spectrum(trace, dt, zone_hint: Optional[int] = None, window: str = "hann",
             pad: int = 8) -> Spectrum:
    """Zero-mean, zero-padded magnitude spectrum.

    ``dt`` is the sample spacing in us, or the array of sample times (which
    must be uniform). ``window`` is ``"hann"`` (peak finding) or ``"rect"``
    (frequency accuracy). With ``zone_hint`` the axis is mapped to true
    frequencies in that Nyquist zone.
    """
    y = np.asarray(trace, dtype=float)
    if y.size < 8:
        raise SpectrumError(f"need at least 8 samples, got {y.size}")
    step = _sample_step(dt)
    y = y - y.mean()
    if window == "hann":
        y = y * np.hanning(y.size)
    elif window != "rect":
        raise SpectrumError(f"unknown window {window!r}")
    nfft = pad * y.size
    mags = np.abs(np.fft.rfft(y, nfft))
    freqs = np.fft.rfftfreq(nfft, step)
    fs = 1.0 / step
    zone = 0 if zone_hint is None else int(zone_hint)
    if zone:
        freqs = reconstruct_frequency(freqs, fs, zone)
        if zone % 2:
            freqs, mags = freqs[::-1], mags[::-1]
    return Spectrum(np.ascontiguousarray(freqs), np.ascontiguousarray(mags), zone, fs)


def find_peaks(freqs, mags, threshold: float = 0.2, min_separation: int = 2) -> np.ndarray:
    """Interior local maxima above ``threshold`` x max, at least ``min_separation`` bins apart.

    Returned in ascending frequency order.
    """
    mags = np.asarray(mags, dtype=float)
    top = float(mags.max()) if mags.size else 0.0
    if top <= 1e-12:
        return np.array([])
    idx, _ = signal.find_peaks(mags, height=threshold * top, distance=max(1, min_separation))
    return np.asarray(freqs)[idx]


def find_dip(result) -> tuple:
    """Center and depth of the dominant dip of a sweep.

    Parabolic interpolation through the minimum and its neighbours; exact
    ties go to the lower axis value. Depth is measured from the sweep maximum.
    """
    x = np.asarray(result.axis_values, dtype=float)
    y = np.asarray(result.p0_values, dtype=float)
    if x.size < 5:
        raise DipError("need at least 5 points")
    if np.ptp(y) < 1e-9:
        raise DipError("no dip: sweep is flat")
    order = np.argsort(x, kind="stable")
    x, y = x[order], y[order]
    i = int(np.argmin(y))
    if i == 0 or i == x.size - 1:
        return float(x[i]), float(y.max() - y[i])
    x0, x1, x2 = x[i - 1], x[i], x[i + 1]
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom
    if a <= 0:
        return float(x1), float(y.max() - y1)
    xv = -b / (2 * a)
    c = y1 - a * x1 * x1 - b * x1
    yv = a * xv * xv + b * xv + c
    return float(xv), float(y.max() - yv)
