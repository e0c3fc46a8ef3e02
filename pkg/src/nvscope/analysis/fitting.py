"""Damped-sinusoid fits seeded from FFT peaks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .spectral import find_peaks

MAX_ITER = 200
XTOL = 1e-10


class FitError(RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass
class Component:
    freq: float   # MHz
    amp: float
    phase: float  # rad, cosine convention
    decay: float  # 1/us


@dataclass
class SinusoidFit:
    components: list
    offset: float
    residual_norm: float
    nfev: int
    t: np.ndarray = field(repr=False)

    def model(self, t=None) -> np.ndarray:
        t = self.t if t is None else np.asarray(t, dtype=float)
        y = np.full(t.shape, self.offset)
        t_rel = t - self.t[0]
        for c in self.components:
            y = y + c.amp * np.exp(-c.decay * t_rel) * np.cos(2 * np.pi * c.freq * t + c.phase)
        return y


def _seed_frequencies(y, dt, n):
    nfft = 16 * y.size
    mags = np.abs(np.fft.rfft(y - y.mean(), nfft))
    freqs = np.fft.rfftfreq(nfft, dt)
    # skip the DC lobe
    mags[:16] = 0.0
    peaks = find_peaks(freqs, mags, threshold=0.0, min_separation=32)
    if len(peaks) < n:
        raise FitError(f"found {len(peaks)} spectral peaks, need {n}")
    strongest = sorted(peaks, key=lambda f: -mags[np.searchsorted(freqs, f)])[:n]
    return np.sort(np.asarray(strongest))


def _basis(t, freqs, rates):
    cols = [np.ones_like(t)]
    for f, g in zip(freqs, rates):
        env = np.exp(-g * t)
        cols += [env * np.cos(2 * np.pi * f * t), -env * np.sin(2 * np.pi * f * t)]
    return np.column_stack(cols)


def fit_damped_sinusoid(trace, dt: float, n_components: int = 1, t0: float = 0.0,
                        decay: bool = True) -> SinusoidFit:
    """Fit ``offset + sum_k a_k exp(-g_k t) cos(2 pi f_k t + phi_k)``.

    ``dt`` is the sample spacing in us; frequencies come out in MHz. Seeds
    come from the zero-padded FFT and the linear amplitudes from a linear
    least-squares solve, then everything is refined with Levenberg-Marquardt
    (at most 200 iterations, relative step tolerance 1e-10).
    """
    y = np.asarray(trace, dtype=float)
    if n_components not in (1, 2):
        raise ValueError("n_components must be 1 or 2")
    per = 5 if decay else 4
    if y.size < 4 * per * n_components:
        raise FitError(f"trace too short ({y.size} samples) for {n_components} components")
    t = np.arange(y.size) * dt
    freqs = _seed_frequencies(y, dt, n_components)
    rates = np.zeros(n_components)
    lin, *_ = np.linalg.lstsq(_basis(t, freqs, rates), y, rcond=None)

    def unpack(p):
        off = p[0]
        f = p[1:1 + n_components]
        g = p[1 + n_components:1 + 2 * n_components] if decay else np.zeros(n_components)
        ab = p[1 + (2 if decay else 1) * n_components:]
        return off, f, g, ab

    def resid(p):
        off, f, g, ab = unpack(p)
        m = np.full_like(t, off)
        for k in range(n_components):
            env = np.exp(-g[k] * t)
            arg = 2 * np.pi * f[k] * t
            m += env * (ab[2 * k] * np.cos(arg) - ab[2 * k + 1] * np.sin(arg))
        return m - y

    p0 = [lin[0], *freqs]
    if decay:
        p0 += list(rates)
    p0 += list(lin[1:])
    p0 = np.asarray(p0, dtype=float)
    nparam = p0.size
    sol = least_squares(resid, p0, method="lm", xtol=XTOL, ftol=1e-15, gtol=1e-15,
                        max_nfev=MAX_ITER * (nparam + 1))
    if sol.status <= 0 or not np.all(np.isfinite(sol.x)):
        raise FitError("least-squares refinement did not converge",
                       {"status": sol.status, "message": sol.message, "nfev": sol.nfev})
    off, f, g, ab = unpack(sol.x)
    comps = []
    for k in range(n_components):
        a, b = ab[2 * k], ab[2 * k + 1]
        amp = float(np.hypot(a, b))
        phase = float(np.arctan2(b, a))
        fk = float(f[k])
        if fk < 0:
            fk, phase = -fk, -phase
        # report the phase at t0 = 0 of the absolute time axis
        phase = float(np.angle(np.exp(1j * (phase - 2 * np.pi * fk * t0))))
        comps.append(Component(fk, amp, phase, float(g[k])))
    comps.sort(key=lambda c: c.freq)
    return SinusoidFit(comps, float(off), float(np.linalg.norm(sol.fun)), int(sol.nfev),
                       t + t0)
