#!/usr/bin/env python3
"""Quadruped balance-and-reach demo driven through the scenario runner.

Equivalent to `taskqp run scenarios/quadruped_balance.yaml`; prints the
check results and the final foot/CoM state.
"""

import os
import sys
import tempfile

import numpy as np

from taskqp.scenario import load_scenario, run_scenario

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def main():
    path = os.path.join(ROOT, "scenarios", "quadruped_balance.yaml")
    scenario = load_scenario(path)
    with tempfile.TemporaryDirectory() as out:
        result = run_scenario(path, out)
        for check in result.checks:
            status = "PASS" if check.passed else "FAIL"
            print(f"[{status}] {check.description} ({check.detail})")
        final = result.configurations[-1]
        model = scenario.model
        print("\nfinal leg4 foot:",
              np.round(model.frame_placement(final, "leg4_foot").translation, 5))
        print("final CoM:      ", np.round(model.com(final), 5))
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
