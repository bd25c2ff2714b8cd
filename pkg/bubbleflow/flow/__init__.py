from bubbleflow.flow.boundary import (
    BoundaryCorrection,
    BoundaryResidual,
    biharmonic_neumann_solve,
    boundary_correction,
    boundary_residual,
    completion,
    split_state,
)
from bubbleflow.flow.constraints import (
    ConstraintBasis,
    ConstraintValues,
    constraint_basis,
    constraint_derivative,
    constraint_values,
    project_H_perp,
    project_K,
    project_K_perp,
    tau,
)
from bubbleflow.flow.runner import FlowRunner, initial_state
from bubbleflow.flow.state import FlowState, Trajectory, TrajectoryRecord
from bubbleflow.flow.stepper import (
    AdmissibleSolution,
    RhsData,
    StationaryResult,
    admissible_initialize,
    constraint_correction,
    dt_max,
    enforce_admissibility,
    j_tilde,
    rhs,
    stationary_solve,
    step,
    velocity_I,
)

__all__ = [
    "AdmissibleSolution",
    "BoundaryCorrection",
    "BoundaryResidual",
    "ConstraintBasis",
    "ConstraintValues",
    "FlowRunner",
    "FlowState",
    "RhsData",
    "StationaryResult",
    "Trajectory",
    "TrajectoryRecord",
    "admissible_initialize",
    "biharmonic_neumann_solve",
    "boundary_correction",
    "boundary_residual",
    "completion",
    "constraint_basis",
    "constraint_correction",
    "constraint_derivative",
    "constraint_values",
    "dt_max",
    "enforce_admissibility",
    "initial_state",
    "j_tilde",
    "project_H_perp",
    "project_K",
    "project_K_perp",
    "rhs",
    "split_state",
    "stationary_solve",
    "step",
    "tau",
    "velocity_I",
]
