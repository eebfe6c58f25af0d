"""Flux-qubit three-port microwave circulator toolkit.

Potential landscape of the coupler loop, local-minimum tracking, the
pair-selective routing rule and its verification, truncated-Fock photon
transfer dynamics, and gate scheduling on the Kagome lattice the couplers
generate.
"""

__version__ = "0.1.0"

from .circulator import (
    CirculationReport,
    RobustnessScan,
    SelectivityReport,
    ViolatedCirculation,
    pair_selectivity,
    robustness_scan,
    select_pair,
    verify_circulation,
)
from .lattice import (
    CouplerState,
    GateSchedule,
    GateStep,
    IllegalTransition,
    Lattice,
    Unreachable,
    build_kagome,
    hop_transfer_demo,
    plan_route,
    qubit_adjacency,
    set_coupler_state,
    validate_schedule,
)
from .minimizer import (
    MinimumRecord,
    NoDoubleWell,
    NonConvergence,
    SaddlePoint,
    SweepTable,
    find_local_minimum,
    sweep_output_current,
    sweep_slopes,
    zero_bias_well_phase,
)
from .model import (
    BiasCurrents,
    ConfigError,
    CouplerConfig,
    DimensionlessScales,
    PhysicalParams,
    default_physical_params,
    effective_junction_energy,
    load_physical_params,
    normalize,
    redimensionalize,
)
from .potential import (
    CouplingCoefficients,
    DerivationMismatch,
    bias_current_support,
    coupling_coefficients,
    coupling_matrix,
    gradient_reduced,
    hessian_reduced,
    potential_full,
    potential_reduced,
    reduced_to_full,
    tilt_offset,
)
from .qdynamics import (
    NormDriftError,
    QuantumSystem,
    ResonatorParams,
    Trajectory,
    TransferReport,
    build_hamiltonian,
    coupling_strength,
    evolve,
    occupations,
    resonator_current_amplitude,
    resonator_current_rms,
    transfer_report,
)

__all__ = [name for name in dir() if not name.startswith("_")]
