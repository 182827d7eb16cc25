"""Model-free control with ultra-local models and finite-time-stable feedback.

Library and CLI for simulating ULM-based closed-loop control of discrete
control-affine plants and for mapping how the stability of the coupled
tracking/estimation error dynamics depends on the designed input influence
matrix.
"""

__version__ = "0.1.0"

from .controller import ControllerConfig, control_law, saturate
from .errors import DegeneratePencilError, SingularInfluenceError
from .gains import (
    CONTRACTION_STEP_BUDGET,
    DEFAULT_CONTROLLER_GAINS,
    DEFAULT_OBSERVER_GAINS,
    GainParams,
    contraction_step,
    holder_gain,
    lyapunov_value,
)
from .observer import ObserverState, estimation_error, measure_ulm_dynamics, observer_update
from .plants import (
    LinearPlant,
    PlantState,
    RigidBodyParams,
    RigidBodyPlant,
    plant_step,
    rigid_body_F,
    rigid_body_G,
    true_dynamics_oracle,
)
from .sim import (
    ConvergenceSummary,
    ReferenceSpec,
    SimConfig,
    SimTrace,
    convergence_metrics,
    default_rigid_body_config,
    run_closed_loop,
    step_reference,
    verify_error_identity,
)
from .stability import (
    AxisSpec,
    GainPair,
    StabilityGrid,
    assemble_A,
    boundary_alpha,
    cd_map,
    char_poly_residual,
    lambda_roots,
    max_root_norm,
    max_root_norm_grid,
    perturbation_R,
    pole_map,
)

__all__ = [
    "AxisSpec",
    "CONTRACTION_STEP_BUDGET",
    "ControllerConfig",
    "ConvergenceSummary",
    "DEFAULT_CONTROLLER_GAINS",
    "DEFAULT_OBSERVER_GAINS",
    "DegeneratePencilError",
    "GainPair",
    "GainParams",
    "LinearPlant",
    "ObserverState",
    "PlantState",
    "ReferenceSpec",
    "RigidBodyParams",
    "RigidBodyPlant",
    "SimConfig",
    "SimTrace",
    "SingularInfluenceError",
    "StabilityGrid",
    "assemble_A",
    "boundary_alpha",
    "cd_map",
    "char_poly_residual",
    "contraction_step",
    "control_law",
    "convergence_metrics",
    "default_rigid_body_config",
    "estimation_error",
    "holder_gain",
    "lambda_roots",
    "lyapunov_value",
    "max_root_norm",
    "max_root_norm_grid",
    "measure_ulm_dynamics",
    "observer_update",
    "perturbation_R",
    "plant_step",
    "pole_map",
    "rigid_body_F",
    "rigid_body_G",
    "run_closed_loop",
    "saturate",
    "step_reference",
    "true_dynamics_oracle",
    "verify_error_identity",
]
