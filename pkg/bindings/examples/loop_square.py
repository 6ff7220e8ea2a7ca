#!/usr/bin/env python3
"""Planar linkage with a kinematic loop following a square trajectory."""

import os

import numpy as np
import taskqp_bindings as tb

ROOT = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

robot = tb.load_model(os.path.join(ROOT, "scenarios", "models", "planar_loop.urdf"))
q0 = robot.neutral_configuration()
for joint, value in {
    "motor1": 2.749793878818125, "passive1": -1.5627962414591057,
    "motor2": 0.39179877477166825, "passive2": 1.5627962414591057,
}.items():
    q0.joints[robot.joint_index[joint]] = value

solver = tb.KinematicsSolver(robot, dt=0.01, configuration=q0)
base_pin = solver.add_frame_task("base", tb.translation_matrix([0.0, 0.0, 0.0]))
base_pin.configure("base_pin", "hard", 1)

# Loop closing task (hard priority).
closing_task = solver.add_relative_position_task("c1", "c2", np.zeros(3))
closing_task.configure("closing", "hard", 1)
closing_task.mask.set_axises("xy")

# Position task for the effector (soft priority).
end_task = solver.add_position_task("end", np.array([0.0, 0.42, 0.0]))

corners = [(0.05, 0.37), (-0.05, 0.37), (-0.05, 0.47), (0.05, 0.47), (0.05, 0.37)]
worst_closure = 0.0
for x, y in corners:
    goal = np.array([x, y, 0.0])
    start = robot.frame_placement(solver.q, "end").translation
    for k in range(1, 251):  # glide to the corner, then settle
        end_task.target = start + min(k / 200.0, 1.0) * (goal - start)
        solver.step()
        gap = robot.relative_placement(solver.q, "c1", "c2").translation
        worst_closure = max(worst_closure, float(np.linalg.norm(gap[:2])))
    tip = robot.frame_placement(solver.q, "end").translation
    print(f"corner ({x:+.2f}, {y:+.2f}): tip {np.round(tip[:2], 5)}")
print("worst loop-closure xy gap:", worst_closure)
