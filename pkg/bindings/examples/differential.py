#!/usr/bin/env python3
"""Differential joint: gear couplings driven from either side."""

import os

import numpy as np
import taskqp_bindings as tb

ROOT = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

robot = tb.load_model(os.path.join(ROOT, "scenarios", "models", "differential.urdf"))
solver = tb.KinematicsSolver(robot, dt=0.02)
pin = solver.add_frame_task("housing", tb.translation_matrix([0.0, 0.0, 0.0]))
pin.configure("housing_pin", "hard", 1)

# Gear coupling constraints (hard priority).
gear_task = solver.add_gear_task()
gear_task.configure("gear", "hard", 1)
gear_task.add_gear("alpha", "upper", 1)
gear_task.add_gear("alpha", "lower", -1)
gear_task.add_gear("beta", "upper", 0.5)
gear_task.add_gear("beta", "lower", 0.5)

# Joint task to control the mechanism (soft priority).
joints_task = solver.add_joints_task()

# Control via passive joints (inverse kinematics of the differential).
joints_task.set_joints({"alpha": 0.8, "beta": 0.3})

solver.enable_velocity_limits()
for _ in range(120):
    solver.step()

idx = robot.joint_index
q = solver.q.joints
print(f"alpha = {q[idx['alpha']]:.6f}  beta = {q[idx['beta']]:.6f}")
print(f"upper = {q[idx['upper']]:.6f}  lower = {q[idx['lower']]:.6f}")
print("coupling residuals:",
      abs(q[idx["alpha"]] - (q[idx["upper"]] - q[idx["lower"]])),
      abs(q[idx["beta"]] - 0.5 * (q[idx["upper"]] + q[idx["lower"]])))
