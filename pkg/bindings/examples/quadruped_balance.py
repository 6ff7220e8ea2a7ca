#!/usr/bin/env python3
"""Quadruped balancing on three legs while reaching with the fourth."""

import os

import numpy as np
import taskqp_bindings as tb

ROOT = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

robot = tb.load_model(os.path.join(ROOT, "scenarios", "models", "quadruped.urdf"))
q0 = robot.neutral_configuration(tb.Placement(np.eye(3), np.array([0.0, 0.0, 0.22])))
stance_angles = {
    "leg1_hip_x": 0.5, "leg1_hip_y": 0.25, "leg1_knee": -0.5,
    "leg2_hip_x": -0.5, "leg2_hip_y": 0.25, "leg2_knee": -0.5,
    "leg3_hip_x": 0.5, "leg3_hip_y": 0.8, "leg3_knee": -0.4,
    "leg4_hip_x": -0.25, "leg4_hip_y": 0.45, "leg4_knee": -1.8,
}
for joint, value in stance_angles.items():
    q0.joints[robot.joint_index[joint]] = value

solver = tb.KinematicsSolver(robot, dt=0.004, configuration=q0)
pos1 = robot.frame_placement(q0, "leg1_foot").translation
pos2 = robot.frame_placement(q0, "leg2_foot").translation
pos3 = robot.frame_placement(q0, "leg3_foot").translation

# Hard-priority position tasks pin the support legs.
leg1 = solver.add_position_task("leg1_foot", pos1)
leg2 = solver.add_position_task("leg2_foot", pos2)
leg3 = solver.add_position_task("leg3_foot", pos3)
leg1.configure("leg1", "hard", 1)
leg2.configure("leg2", "hard", 1)
leg3.configure("leg3", "hard", 1)

# Hard CoM polygonal constraint over the support triangle.
polygon = np.array([pos1, pos2, pos3])
com_const = solver.add_com_polygon_constraint(polygon, margin=0.01)
com_const.configure("com_constraint", "hard", 1)

# Soft low-priority pose preference for the body.
T_world_body = tb.translation_matrix([0.0, 0.0, 0.22])
body_task = solver.add_frame_task("body", T_world_body)
body_task.configure("body", "soft", 1)

# Soft high-priority reaching task for the free leg.
target = np.array([-0.14, -0.17, 0.10])
leg4 = solver.add_position_task("leg4_foot", target)
leg4.configure("leg4", "soft", 1e3)

solver.enable_velocity_limits()
solver.enable_joint_limits()

for _ in range(200):
    solver.step()

foot = robot.frame_placement(solver.q, "leg4_foot").translation
print("leg4 foot:", np.round(foot, 5), "error:", np.linalg.norm(foot - target))
print("CoM:", np.round(robot.com(solver.q), 5))
