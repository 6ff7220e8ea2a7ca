"""Command-line scenario runner.

Exit codes: 0 all checks pass, 2 validation failure, 3 infeasible hard
constraints, 4 solver nonconvergence, 1 checks failed.
"""

from __future__ import annotations

import argparse
import sys

from .errors import (
    InfeasibleError,
    ModelError,
    NonconvergenceError,
    ScenarioError,
    TaskQPError,
)
from .scenario import describe_scenario, run_scenario

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_NONCONVERGENCE = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taskqp",
        description="Run or validate declarative QP / inverse-kinematics scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write trajectory + report")
    run.add_argument("scenario", help="path to the scenario YAML file")
    run.add_argument("--out", default=".", help="output directory (default: cwd)")
    run.add_argument("--dump-qp", default=None, metavar="DIR",
                     help="dump per-solve QP matrices into DIR")
    run.add_argument("--max-steps", type=int, default=None,
                     help="override the scenario's step count")
    run.add_argument("--tolerance", type=float, default=None,
                     help="override the scenario's check tolerance")
    run.add_argument("--seed", type=int, default=None,
                     help="seed recorded in the report for randomized fixtures")

    check = sub.add_parser("check", help="validate a scenario and report QP dimensions")
    check.add_argument("scenario", help="path to the scenario YAML file")

    solve_dump = sub.add_parser(
        "solve-dump", help="solve a QP matrix dump file and print the solution"
    )
    solve_dump.add_argument("dump", help="path to a QP dump written by --dump-qp")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "check":
            print(describe_scenario(args.scenario))
            return EXIT_OK
        if args.command == "solve-dump":
            from .active_set import solve_qp
            from .qp_io import load_standard_qp

            qp = load_standard_qp(args.dump)
            result = solve_qp(qp)
            print("x:", " ".join("%.17g" % v for v in result.x))
            print(f"iterations: {result.iterations}")
            print(f"kkt_residual: {result.kkt_residual:.3e}")
            print(f"active_set: {result.active_set}")
            return EXIT_OK

        result = run_scenario(
            args.scenario,
            out_dir=args.out,
            dump_dir=args.dump_qp,
            max_steps=args.max_steps,
            tolerance=args.tolerance,
            seed=args.seed,
        )
        for check_result in result.checks:
            status = "PASS" if check_result.passed else "FAIL"
            print(f"[{status}] {check_result.description} ({check_result.detail})")
        if result.trajectory_path:
            print(f"trajectory: {result.trajectory_path}")
        if result.report_path:
            print(f"report: {result.report_path}")
        return EXIT_OK if result.passed else EXIT_CHECKS_FAILED
    except (ScenarioError, ModelError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NonconvergenceError as exc:
        print(f"nonconvergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except TaskQPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
