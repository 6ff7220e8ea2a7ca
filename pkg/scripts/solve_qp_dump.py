#!/usr/bin/env python3
"""Standalone check tool: solve a QP matrix dump and print KKT diagnostics.

Usage: python scripts/solve_qp_dump.py path/to/qp_000000.txt

The dump format is the plain-text one written by `taskqp run --dump-qp`,
so solutions can be cross-checked against external solvers.
"""

import sys

from taskqp import load_standard_qp, solve_qp


def main(argv):
    if len(argv) != 2:
        print(__doc__)
        return 2
    qp = load_standard_qp(argv[1])
    result = solve_qp(qp)
    print(f"dimension: {qp.dimension}")
    print(f"equalities: {qp.A.shape[0]}  inequalities: {qp.G.shape[0]}")
    print("x:", " ".join("%.17g" % v for v in result.x))
    print(f"active inequality rows: {result.active_set}")
    print(f"iterations: {result.iterations}")
    print(f"kkt_residual: {result.kkt_residual:.3e}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
