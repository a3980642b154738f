"""Switched constrained subgradient flows: simulation and verification.

The package simulates trajectories of projected subgradient and proximal
dynamics for nonsmooth convex objectives restricted to closed convex sets,
under piecewise-constant switching between modes, and grades the runs
against the decrease, nonexpansiveness, and limit properties the dynamics
are supposed to satisfy.
"""

from ._kernels import BACKEND, available_backends
from .errors import (
    AnchorNotInA,
    AnchorNotInAq,
    AnchorNotZero,
    ConfigInvalid,
    GridMismatch,
    InitialConditionOutsideSet,
    LayoutMismatch,
    NonConvergence,
    NoProxOracle,
    OracleUnavailable,
    PointOutsideSet,
    SwflowError,
    UnknownPreset,
)
from .graphs import SinusoidWeights, WeightedGraph
from .integrate import (
    COMPLETED,
    DIVERGED,
    LEFT_CONSTRAINT,
    REPROJECT_ON_SWITCH,
    TERMINATE_ON_SWITCH,
    StepScheme,
    Termination,
    Trajectory,
    build_grid,
    pairwise_distance_series,
    read_trajectory_csv,
    simulate,
    simulate_monotone,
    step,
    write_trajectory,
)
from .maps import (
    MonotoneMapDescriptor,
    gradient_map,
    linear_map,
    rotation_map,
    saddle_flow_map,
)
from .monitors import (
    consensus_series,
    demipositivity_probe,
    limit_detect,
    lyapunov_check,
    pairwise_contraction_check,
    per_mode_nonexpansiveness,
    residuals,
)
from .objectives import (
    InfNormCoupling,
    ModeDescriptor,
    ObjectiveDescriptor,
    PNormCoupling,
    argmin_oracle,
    intersect_oracles,
    union_graph_connected,
)
from .polytope import GeneratorPolytope, min_norm_point, minkowski_sum
from .presets import (
    PRESET_NAMES,
    CheckSpec,
    Scenario,
    load_config,
    preset,
    random_scenario,
    scenario_from_config,
)
from .prox import (
    IsotropicQuadratic,
    L1Norm,
    RestrictedFunction,
    SquaredDistance,
    ZeroFunction,
    prox,
)
from .runner import run_scenario, summary_text, sweep, write_outputs
from .sets import (
    AffineSubspace,
    Ball,
    Box,
    ConvexSet,
    Halfspace,
    Intersection,
    Product,
    WholeSpace,
    dykstra,
    normal_cone_residual,
)
from .state import AgentLayout, consensus_error
from .switching import (
    SwitchingSignal,
    make_constant,
    make_random_dwell,
    make_round_robin,
    recurrence_report,
)

__version__ = "0.1.0"

__all__ = [
    "AffineSubspace",
    "AgentLayout",
    "AnchorNotInA",
    "AnchorNotInAq",
    "AnchorNotZero",
    "BACKEND",
    "Ball",
    "Box",
    "COMPLETED",
    "CheckSpec",
    "ConfigInvalid",
    "ConvexSet",
    "DIVERGED",
    "GeneratorPolytope",
    "GridMismatch",
    "Halfspace",
    "InfNormCoupling",
    "InitialConditionOutsideSet",
    "Intersection",
    "IsotropicQuadratic",
    "L1Norm",
    "LEFT_CONSTRAINT",
    "LayoutMismatch",
    "ModeDescriptor",
    "MonotoneMapDescriptor",
    "NoProxOracle",
    "NonConvergence",
    "ObjectiveDescriptor",
    "OracleUnavailable",
    "PNormCoupling",
    "PRESET_NAMES",
    "PointOutsideSet",
    "Product",
    "REPROJECT_ON_SWITCH",
    "RestrictedFunction",
    "Scenario",
    "SinusoidWeights",
    "SquaredDistance",
    "StepScheme",
    "SwflowError",
    "SwitchingSignal",
    "TERMINATE_ON_SWITCH",
    "Termination",
    "Trajectory",
    "UnknownPreset",
    "WeightedGraph",
    "WholeSpace",
    "ZeroFunction",
    "argmin_oracle",
    "available_backends",
    "build_grid",
    "consensus_error",
    "consensus_series",
    "demipositivity_probe",
    "dykstra",
    "gradient_map",
    "intersect_oracles",
    "limit_detect",
    "linear_map",
    "load_config",
    "lyapunov_check",
    "make_constant",
    "make_random_dwell",
    "make_round_robin",
    "min_norm_point",
    "minkowski_sum",
    "normal_cone_residual",
    "pairwise_contraction_check",
    "pairwise_distance_series",
    "per_mode_nonexpansiveness",
    "preset",
    "prox",
    "random_scenario",
    "read_trajectory_csv",
    "recurrence_report",
    "residuals",
    "rotation_map",
    "run_scenario",
    "saddle_flow_map",
    "scenario_from_config",
    "simulate",
    "simulate_monotone",
    "step",
    "summary_text",
    "sweep",
    "union_graph_connected",
    "write_outputs",
    "write_trajectory",
]
