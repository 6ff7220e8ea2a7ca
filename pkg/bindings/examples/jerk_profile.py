#!/usr/bin/env python3
"""Integrator-chain problem written against the scripting layer."""

import numpy as np
import taskqp_bindings as tb

# A problem with jerk as decision variable.
problem = tb.Problem()
dddx = problem.add_variable(10)
integ = tb.Integrator(dddx, np.zeros(3), 3, 0.1)

# Intermediate waypoint constraints on position.
problem.add_constraint(integ.expr(3, 0) <= -0.5)
problem.add_constraint(integ.expr(7, 0) >= 1.5)

# Terminal constraints.
problem.add_constraint(integ.expr(10, 0) == 1.0)
problem.add_constraint(integ.expr(10, 1) == 0.0)
problem.add_constraint(integ.expr(10, 2) == 0.0)

# Solving the underlying QP problem.
result = problem.solve()

states = integ.simulate(result.x)
for k, (p, v, a) in enumerate(states):
    print(f"step {k:2d}: position {p: .6f} velocity {v: .6f} acceleration {a: .6f}")
