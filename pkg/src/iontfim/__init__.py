"""Trapped-ion transverse-field Ising simulator.

Computes ion-chain spin-spin couplings from trap parameters, exact
spectra of the transverse-field Ising Hamiltonian, and compares two
ground-state preparation protocols: the bang-bang quench/hold/quench
shortcut and the locally adiabatic field ramp.
"""

from .trapchain import (
    TrapConfig,
    IonChain,
    ModeSpectrum,
    CouplingMatrix,
    equilibrium_positions,
    transverse_modes,
    coupling_matrix,
    fit_power_law,
    synthetic_couplings,
    trap_couplings,
)
from .spinmodel import (
    SpinBasis,
    HamiltonianHandle,
    SectorLabels,
    GroundManifold,
    hamiltonian,
    apply_hamiltonian,
    low_spectrum,
    sector_labels,
    classical_ground_manifold,
    x_amplitudes,
)
from .gapspec import GapProfile, coupled_gap, gap_profile
from .protocols import (
    BangBangParams,
    RampProfile,
    ProtocolResult,
    bangbang_run,
    la_gamma,
    la_ramp,
    cn_evolve,
    locally_adiabatic_run,
    ground_probability,
    excitation_histogram,
    field_integral,
)
from .optimize import (
    ScanGrid,
    ComparisonRow,
    scan_bangbang,
    best_point,
    compare_protocols,
)

__version__ = "0.1.0"
