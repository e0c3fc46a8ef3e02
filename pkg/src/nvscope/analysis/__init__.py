"""Spectra, fits and inversions of simulated or measured traces."""

from .fitting import Component, FitError, SinusoidFit, fit_damped_sinusoid
from .inversion import (
    HyperfineEstimate,
    InversionError,
    Localization,
    hyperfine_closed_form,
    hyperfine_from_correlation,
    hyperfine_numerical,
    localize,
    nn_coupling_estimate,
    predict_fp,
)
from .polarization import PolarizationFit, nspin_curve
from .spectral import (
    DipError,
    Spectrum,
    SpectrumError,
    alias_frequency,
    find_dip,
    find_peaks,
    reconstruct_frequency,
    spectrum,
)

__all__ = [
    "Component", "FitError", "SinusoidFit", "fit_damped_sinusoid",
    "HyperfineEstimate", "InversionError", "Localization", "hyperfine_closed_form",
    "hyperfine_from_correlation", "hyperfine_numerical", "localize", "nn_coupling_estimate",
    "predict_fp", "PolarizationFit", "nspin_curve", "DipError", "Spectrum", "SpectrumError",
    "alias_frequency", "find_dip", "find_peaks", "reconstruct_frequency", "spectrum",
]
