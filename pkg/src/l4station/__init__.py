"""Lyapunov station keeping on circular orbits about the CR3BP L4 point."""

from .controller import ControlOutput, compute_control, feedback_linearized_control, raw_control, saturate
from .dynamics import (
    R_MIN,
    EpsilonPair,
    SpacecraftState,
    controlled_dynamics,
    epsilons,
    natural_dynamics,
    p_scalar,
    relative_positions,
    z_vector,
)
from .errors import (
    ConfigError,
    DegenerateRadiusError,
    InvalidParameterError,
    L4StationError,
    OutputError,
    SingularityError,
)
from .geometry import (
    ThreeBodySystem,
    build_system,
    coriolis_matrix_apply,
    earth_moon,
    inertial_to_synodic,
    l4_identity_residual,
    synodic_to_inertial,
)
from .integrator import (
    IntegratorSettings,
    SimulationResult,
    Trajectory,
    TrajectorySample,
    default_step,
    detect_capture,
    rk4_step,
    simulate,
)
from .lyapunov import (
    ControlObjective,
    LyapunovAudit,
    dVdt_chain,
    dVdt_ideal,
    lasalle_metrics,
    lyapunov_value,
    momentum_error_e1,
)
from .scenario import ScenarioConfig, SweepConfig, load_scenario, load_sweep, run_scenario, run_sweep

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ControlObjective",
    "ControlOutput",
    "DegenerateRadiusError",
    "EpsilonPair",
    "IntegratorSettings",
    "InvalidParameterError",
    "L4StationError",
    "LyapunovAudit",
    "OutputError",
    "R_MIN",
    "ScenarioConfig",
    "SimulationResult",
    "SingularityError",
    "SpacecraftState",
    "SweepConfig",
    "ThreeBodySystem",
    "Trajectory",
    "TrajectorySample",
    "build_system",
    "compute_control",
    "controlled_dynamics",
    "coriolis_matrix_apply",
    "dVdt_chain",
    "dVdt_ideal",
    "default_step",
    "detect_capture",
    "earth_moon",
    "epsilons",
    "feedback_linearized_control",
    "inertial_to_synodic",
    "l4_identity_residual",
    "lasalle_metrics",
    "load_scenario",
    "load_sweep",
    "lyapunov_value",
    "momentum_error_e1",
    "natural_dynamics",
    "p_scalar",
    "raw_control",
    "relative_positions",
    "rk4_step",
    "run_scenario",
    "run_sweep",
    "saturate",
    "simulate",
    "synodic_to_inertial",
    "z_vector",
]
