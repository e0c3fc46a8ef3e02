"""Simulation and analysis of single-nuclear-spin NMR with an NV-centre sensor."""

from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .spin import (
    DomainError,
    Eigensystem,
    NuclearSpec,
    SpinSystem,
    branch_hamiltonian,
    dipolar_coupling,
    invert_dipolar,
    nn_coupling_estimate,
    propagator,
)

__version__ = "0.1.0"
