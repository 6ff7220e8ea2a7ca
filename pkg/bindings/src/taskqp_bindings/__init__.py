"""Scripting-friendly surface over the taskqp core.

Everything here delegates 1:1 to the core package: the same classes are
re-exported by reference, so numerical results are bit-identical to direct
core usage.  The additions are conveniences for concise scripts: a 4x4
translation-matrix helper and the ``set_axises`` spelling alias on axis
masks.
"""

import numpy as np

from taskqp import (
    AxisMask,
    Comparison,
    Configuration,
    Expression,
    Integrator,
    InfeasibleError,
    KinematicsSolver,
    LinearSystem,
    Placement,
    Problem,
    RigidBodyModel,
    TaskQPError,
    UnknownNameError,
    Variable,
    chain_system,
    discretize,
    load_model,
    load_urdf,
    rpy_matrix,
    so3_exp,
    so3_log,
)

# Alias used throughout quick scripts; additive, same method object.
AxisMask.set_axises = AxisMask.set_axes


def translation_matrix(xyz) -> np.ndarray:
    """Homogeneous 4x4 transform with identity rotation."""
    T = np.eye(4)
    T[:3, 3] = np.asarray(xyz, dtype=float)
    return T


def rotation_matrix_rpy(roll, pitch, yaw) -> np.ndarray:
    """Homogeneous 4x4 transform from roll/pitch/yaw, zero translation."""
    T = np.eye(4)
    T[:3, :3] = rpy_matrix(roll, pitch, yaw)
    return T


__all__ = [
    "AxisMask",
    "Comparison",
    "Configuration",
    "Expression",
    "InfeasibleError",
    "Integrator",
    "KinematicsSolver",
    "LinearSystem",
    "Placement",
    "Problem",
    "RigidBodyModel",
    "TaskQPError",
    "UnknownNameError",
    "Variable",
    "chain_system",
    "discretize",
    "load_model",
    "load_urdf",
    "rotation_matrix_rpy",
    "rpy_matrix",
    "so3_exp",
    "so3_log",
    "translation_matrix",
]
