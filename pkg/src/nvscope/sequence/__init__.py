"""Pulse programs: intermediate representation, builders and text format."""

from .builders import (
    POLY_PATTERN,
    XY16_PHASES,
    build_correlation,
    build_fid,
    build_polarization_transient,
    build_pulsepol,
    build_pulsepol_spectrum_point,
    build_rabi,
    build_xy16,
    build_xy16_readout,
    pulsepol_block,
    pulsepol_unit,
    xy16_block,
    xy16_unit,
)
from .dsl import ParseError, format_sequence, parse_sequence
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
    flatten,
)
