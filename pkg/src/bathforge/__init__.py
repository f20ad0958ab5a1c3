"""bathforge: parametric bath engineering of a multi-level qubit, simulated.

Dense Lindblad dynamics for a lossy auxiliary ("snail") mode parametrically
coupled to a transmon-style qubit, plus the closed-form steady states,
chemical-potential analysis, rate fitting, and experiment presets built on
top of it.
"""

__version__ = "0.1.0"

from .analytic import (
    BathSpec,
    RateSet,
    chemical_potential,
    fermi_dirac_populations,
    grand_canonical_rho,
    heating_population_analytic,
    heating_rate_weak_coupling,
    semiclassical_2level,
    semiclassical_3level,
    thermal_nbar,
    two_level_steady_state,
)
from .config import Config, ConfigError, load_config, parse_config, resolve_config
from .core import (
    DensityMatrix,
    HilbertSpace,
    Operator,
    SuperOperator,
    basis_state,
    dissipator_action,
    identity,
    ladder,
    liouvillian,
    number,
    partial_trace,
    projector,
)
from .dynamics import (
    PulseSequence,
    Segment,
    SweepResult,
    Trajectory,
    evolve,
    initial_state,
    run_sequence,
    steady_state,
    steady_state_from_liouvillian,
    sweep,
)
from .estimation import (
    DesignResult,
    FitResult,
    add_measurement_noise,
    design_pumps,
    fit_rates_2level,
    fit_rates_3level,
)
from .model import (
    DriveKind,
    DriveSpec,
    PumpPhysical,
    SystemSpec,
    build_dissipators,
    build_effective_hamiltonian,
    effective_couplings,
)
from .presets import ExperimentPreset, available_presets, build_preset, run_preset
from .reports import (
    CSV_COLUMNS,
    RunReport,
    load_report,
    read_trajectory_csv,
    trajectory_csv_text,
    write_report_json,
    write_trajectory_csv,
)

__all__ = [
    "__version__",
    # core linear algebra
    "HilbertSpace",
    "Operator",
    "DensityMatrix",
    "SuperOperator",
    "ladder",
    "number",
    "projector",
    "identity",
    "basis_state",
    "dissipator_action",
    "liouvillian",
    "partial_trace",
    # physical model
    "SystemSpec",
    "DriveSpec",
    "DriveKind",
    "PumpPhysical",
    "build_effective_hamiltonian",
    "build_dissipators",
    "effective_couplings",
    # closed forms
    "BathSpec",
    "RateSet",
    "thermal_nbar",
    "two_level_steady_state",
    "chemical_potential",
    "fermi_dirac_populations",
    "grand_canonical_rho",
    "heating_population_analytic",
    "heating_rate_weak_coupling",
    "semiclassical_2level",
    "semiclassical_3level",
    # dynamics
    "Trajectory",
    "Segment",
    "PulseSequence",
    "SweepResult",
    "evolve",
    "run_sequence",
    "initial_state",
    "steady_state",
    "steady_state_from_liouvillian",
    "sweep",
    # estimation and design
    "FitResult",
    "DesignResult",
    "fit_rates_2level",
    "fit_rates_3level",
    "design_pumps",
    "add_measurement_noise",
    # configuration, presets, file contracts
    "Config",
    "ConfigError",
    "parse_config",
    "resolve_config",
    "load_config",
    "ExperimentPreset",
    "available_presets",
    "build_preset",
    "run_preset",
    "RunReport",
    "CSV_COLUMNS",
    "trajectory_csv_text",
    "write_trajectory_csv",
    "read_trajectory_csv",
    "write_report_json",
    "load_report",
]
