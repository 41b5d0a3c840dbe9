"""Work, work fluctuations and dissipated heat for a charge-swept
Cooper-pair box: exact propagation, an instantaneous-crossing model and an
adiabatic-basis master equation, cross-checked against each other.

Normalized units everywhere: energies in E_C, times in hbar/E_C.
"""

from .closed import (
    PropagatorGrid,
    WorkMoments,
    first_law_closed,
    initial_ket,
    propagate,
    with_initial_state,
    work_from_power,
    work_moments,
    work_moments_mixture,
)
from .config import ConfigError, SweepConfig, config_echo, parse_config
from .cpb import (
    BandStructure,
    DriveSample,
    ModelParams,
    RateBundle,
    band_structure,
    bath_rates,
    chi_adiabatic,
    drive,
    hamiltonian_and_power,
    spectral_density,
)
from .linalg import IntegrationError, rk4_integrate
from .lz import (
    InitialState,
    LZParams,
    WorkDistribution,
    WorkStats,
    charge_basis_oracle,
    evolve_instantaneous,
    gap_phase_integral,
    log_gamma,
    lz_parameters,
    stokes_phase,
    transfer_matrix,
    work_distribution_ground,
    work_stats_analytic,
)
from .opensys import (
    BlochState,
    FastRelaxationHeat,
    HeatLedger,
    OpenResult,
    PositivityError,
    fast_relaxation_heat,
    integrate_open,
    me_rhs,
    me_rhs_at,
    weak_coupling_estimate,
)

__version__ = "0.1.0"

__all__ = [
    "BandStructure",
    "BlochState",
    "ConfigError",
    "DriveSample",
    "FastRelaxationHeat",
    "HeatLedger",
    "InitialState",
    "IntegrationError",
    "LZParams",
    "ModelParams",
    "OpenResult",
    "PositivityError",
    "PropagatorGrid",
    "RateBundle",
    "SweepConfig",
    "WorkDistribution",
    "WorkMoments",
    "WorkStats",
    "band_structure",
    "bath_rates",
    "charge_basis_oracle",
    "chi_adiabatic",
    "config_echo",
    "drive",
    "evolve_instantaneous",
    "fast_relaxation_heat",
    "first_law_closed",
    "gap_phase_integral",
    "hamiltonian_and_power",
    "initial_ket",
    "integrate_open",
    "log_gamma",
    "lz_parameters",
    "me_rhs",
    "me_rhs_at",
    "parse_config",
    "propagate",
    "rk4_integrate",
    "spectral_density",
    "stokes_phase",
    "transfer_matrix",
    "weak_coupling_estimate",
    "with_initial_state",
    "work_distribution_ground",
    "work_from_power",
    "work_moments",
    "work_moments_mixture",
    "__version__",
]
