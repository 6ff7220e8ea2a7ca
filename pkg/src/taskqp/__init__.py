"""QP-based planning and control toolkit.

Declare tasks, constraints and integrated linear dynamics at a high level;
they compile into standard-form quadratic programs, solved by an embedded
dense active-set method, and drive whole-body task-space inverse kinematics
on floating-base rigid-body models.
"""

from .active_set import SolveResult, solve_qp
from .errors import (
    DimensionError,
    EmptyProblemError,
    InfeasibleError,
    ModelError,
    NonconvergenceError,
    NotPositiveDefiniteError,
    RankDeficiencyError,
    ScenarioError,
    TaskQPError,
    UnknownNameError,
)
from .expressions import Comparison, Expression, Variable, stack
from .ik import (
    AxisMask,
    ComPolygonConstraint,
    ComTask,
    FrameTask,
    GearTask,
    JointRangeConstraint,
    JointsTask,
    KinematicsSolver,
    OrientationTask,
    PositionTask,
    RelativeFrameTask,
    RelativeOrientationTask,
    RelativePositionTask,
    SelfCollisionConstraint,
    StepReport,
    VelocityLimitConstraint,
)
from .integrator import Integrator, LinearSystem, chain_system, discretize
from .model import Configuration, Frame, Joint, Link, RigidBodyModel, integrate_config
from .problem import (
    ConstraintSpec,
    ObjectiveTerm,
    Problem,
    ProblemResult,
    StandardQP,
)
from .qp_io import dump_standard_qp, load_standard_qp
from .qr_reduction import ReducedQP, recover_solution, reduce_qr
from .rotations import (
    Placement,
    rpy_matrix,
    skew,
    so3_exp,
    so3_left_jacobian_inverse,
    so3_log,
)
from .urdf import load_urdf, load_urdf_file


def load_model(urdf_path, collisions_path=None) -> RigidBodyModel:
    """Load a URDF file plus an optional collision sidecar."""
    model = load_urdf_file(urdf_path)
    if collisions_path is not None:
        with open(collisions_path) as fh:
            model.attach_collisions(fh.read())
    return model


__all__ = [
    "AxisMask",
    "Comparison",
    "ComPolygonConstraint",
    "ComTask",
    "Configuration",
    "ConstraintSpec",
    "DimensionError",
    "EmptyProblemError",
    "Expression",
    "Frame",
    "FrameTask",
    "GearTask",
    "InfeasibleError",
    "Integrator",
    "Joint",
    "JointRangeConstraint",
    "JointsTask",
    "KinematicsSolver",
    "LinearSystem",
    "Link",
    "ModelError",
    "NonconvergenceError",
    "NotPositiveDefiniteError",
    "ObjectiveTerm",
    "OrientationTask",
    "Placement",
    "PositionTask",
    "Problem",
    "ProblemResult",
    "RankDeficiencyError",
    "ReducedQP",
    "RelativeFrameTask",
    "RelativeOrientationTask",
    "RelativePositionTask",
    "RigidBodyModel",
    "ScenarioError",
    "SelfCollisionConstraint",
    "SolveResult",
    "StandardQP",
    "StepReport",
    "TaskQPError",
    "UnknownNameError",
    "Variable",
    "VelocityLimitConstraint",
    "chain_system",
    "discretize",
    "dump_standard_qp",
    "integrate_config",
    "load_model",
    "load_standard_qp",
    "load_urdf",
    "load_urdf_file",
    "recover_solution",
    "reduce_qr",
    "rpy_matrix",
    "skew",
    "so3_exp",
    "so3_left_jacobian_inverse",
    "so3_log",
    "solve_qp",
    "stack",
]
