#!/usr/bin/env python3
"""Minimum-norm jerk profile with waypoint and terminal constraints.

Ten piecewise-constant jerk inputs over a 1 s horizon drive a triple
integrator; position waypoints at steps 3 and 7 plus a terminal rest state
fully shape the trajectory.  Prints the resulting state table.
"""

import numpy as np

from taskqp import Integrator, Problem


def main():
    problem = Problem()
    jerk = problem.add_variable(10)
    integ = Integrator(jerk, np.zeros(3), 3, 0.1)

    problem.add_constraint(integ.expr(3, 0) <= -0.5)
    problem.add_constraint(integ.expr(7, 0) >= 1.5)
    problem.add_constraint(integ.expr(10, 0) == 1.0)
    problem.add_constraint(integ.expr(10, 1) == 0.0)
    problem.add_constraint(integ.expr(10, 2) == 0.0)

    result = problem.solve()
    states = integ.simulate(result.x)

    print(f"{'step':>4} {'t':>5} {'position':>12} {'velocity':>12} {'acceleration':>14}")
    for k, (p, v, a) in enumerate(states):
        print(f"{k:>4} {k * 0.1:>5.2f} {p:>12.6f} {v:>12.6f} {a:>14.6f}")
    print(f"\nsolver iterations: {result.solver.iterations}")
    print(f"KKT residual: {result.solver.kkt_residual:.2e}")


if __name__ == "__main__":
    main()
