"""Declarative scenario files: load, validate, run, record, check.

A scenario is a YAML document of kind "ik" (iterate the kinematics solver
over a model) or "problem" (a one-shot QP over an integrator chain).  The
runner writes a comma-separated trajectory with a ``step,time,...`` header
plus a plain-text report, and evaluates the declared checks; formatting is
fixed so outputs are byte-stable across runs.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from .errors import ScenarioError
from .ik import KinematicsSolver
from .integrator import Integrator
from .model import Configuration, RigidBodyModel
from .problem import Problem
from .qp_io import dump_standard_qp
from .rotations import Placement, rpy_matrix
from . import urdf

FLOAT_FORMAT = "%.17g"


def _require(condition, path, message):
    if not condition:
        raise ScenarioError(f"{path}: {message}")


def _known_keys(entry, allowed, path):
    unknown = set(entry) - set(allowed)
    _require(not unknown, path, f"unknown keys {sorted(unknown)}")


def _vector(entry, path, size=3):
    arr = np.asarray(entry, dtype=float)
    _require(arr.shape == (size,), path, f"expected {size} numbers")
    return arr


TASK_KEYS = {
    "name", "type", "frame", "frame_a", "frame_b", "target", "target_xyz",
    "target_rpy", "targets", "gears", "waypoints", "priority", "weight",
    "mask", "orientation_mask",
}
CONSTRAINT_KEYS = {
    "name", "type", "vertices", "frames", "margin", "activation",
    "priority", "weight", "pairs",
}
CHECK_KEYS = {
    "kind", "frame", "task", "constraint", "tolerance", "slack",
}
OUTPUT_KEYS = {"kind", "frame"}


@dataclass
class Waypoints:
    times: np.ndarray
    values: np.ndarray  # (k, dim)

    def at(self, t: float) -> np.ndarray:
        if t <= self.times[0]:
            return self.values[0]
        if t >= self.times[-1]:
            return self.values[-1]
        out = np.empty(self.values.shape[1])
        for d in range(self.values.shape[1]):
            out[d] = np.interp(t, self.times, self.values[:, d])
        return out


@dataclass
class Scenario:
    kind: str
    path: str
    doc: dict
    model: RigidBodyModel | None = None
    initial: Configuration | None = None
    dt: float = 0.01
    steps: int = 1
    tolerance: float = 1e-6
    tasks: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    # problem kind
    variables: int = 0
    integrator_spec: dict | None = None
    problem_constraints: list = field(default_factory=list)


def _load_initial(model, entry, path) -> Configuration:
    entry = entry or {}
    _known_keys(entry, {"base_xyz", "base_rpy", "joints"}, path)
    xyz = _vector(entry.get("base_xyz", [0, 0, 0]), f"{path}.base_xyz")
    rpy = _vector(entry.get("base_rpy", [0, 0, 0]), f"{path}.base_rpy")
    q = model.neutral_configuration(Placement(rpy_matrix(*rpy), xyz))
    for joint, value in (entry.get("joints") or {}).items():
        _require(joint in model.joint_index, f"{path}.joints", f"unknown joint {joint!r}")
        q.joints[model.joint_index[joint]] = float(value)
    return q


def load_scenario(path) -> Scenario:
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh.read())
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ScenarioError(f"scenario is not valid YAML: {exc}") from exc
    if not isinstance(doc, dict) or not doc:
        raise ScenarioError("scenario must be a non-empty mapping")

    kind = doc.get("kind")
    _require(kind in ("ik", "problem"), "kind", f"must be 'ik' or 'problem', got {kind!r}")
    scenario = Scenario(kind=kind, path=os.path.abspath(path), doc=doc)

    if kind == "problem":
        _known_keys(doc, {"kind", "variables", "integrator", "constraints", "checks"}, "scenario")
        scenario.variables = int(doc.get("variables", 0))
        _require(scenario.variables >= 1, "variables", "need at least one decision variable")
        spec = doc.get("integrator")
        _require(isinstance(spec, dict), "integrator", "missing integrator block")
        _known_keys(spec, {"order", "dt", "initial_state"}, "integrator")
        _require("order" in spec and "dt" in spec, "integrator", "needs order and dt")
        scenario.integrator_spec = spec
        scenario.dt = float(spec["dt"])
        constraints = doc.get("constraints") or []
        _require(constraints, "constraints", "a problem scenario needs constraints")
        for i, entry in enumerate(constraints):
            p = f"constraints[{i}]"
            _known_keys(entry, {"state", "step", "time", "relation", "value",
                                "priority", "weight"}, p)
            _require("state" in entry, p, "missing state index")
            _require(("step" in entry) != ("time" in entry), p,
                     "exactly one of step/time required")
            _require(entry.get("relation") in ("<=", ">=", "=", "=="), p,
                     f"bad relation {entry.get('relation')!r}")
            _require("value" in entry, p, "missing value")
            scenario.problem_constraints.append(entry)
        return scenario

    _known_keys(doc, {"kind", "model", "collisions", "dt", "steps", "tolerance",
                      "initial", "tasks", "constraints", "checks", "outputs"},
                "scenario")
    _require("model" in doc, "model", "missing model path")
    base_dir = os.path.dirname(scenario.path)
    model_path = os.path.join(base_dir, doc["model"])
    _require(os.path.exists(model_path), "model", f"file not found: {doc['model']}")
    model = urdf.load_urdf_file(model_path)
    if doc.get("collisions"):
        sidecar_path = os.path.join(base_dir, doc["collisions"])
        _require(os.path.exists(sidecar_path), "collisions",
                 f"file not found: {doc['collisions']}")
        with open(sidecar_path) as fh:
            model.attach_collisions(fh.read())
    scenario.model = model
    scenario.dt = float(doc.get("dt", 0.01))
    _require(scenario.dt > 0, "dt", "must be positive")
    scenario.steps = int(doc.get("steps", 1))
    _require(scenario.steps >= 1, "steps", "must be >= 1")
    scenario.tolerance = float(doc.get("tolerance", 1e-6))
    scenario.initial = _load_initial(model, doc.get("initial"), "initial")

    names = set()
    for i, entry in enumerate(doc.get("tasks") or []):
        p = f"tasks[{i}]"
        _known_keys(entry, TASK_KEYS, p)
        _require("type" in entry and "name" in entry, p, "needs type and name")
        _require(entry["name"] not in names, p, f"duplicate name {entry['name']!r}")
        names.add(entry["name"])
        for key in ("frame", "frame_a", "frame_b"):
            if key in entry:
                _require(entry[key] in model.frames, f"{p}.{key}",
                         f"unknown frame {entry[key]!r}")
        if entry["type"] not in ("position", "orientation", "frame",
                                 "relative_position", "relative_orientation",
                                 "relative_frame", "com", "joints", "gear"):
            raise ScenarioError(f"{p}.type: unknown task type {entry['type']!r}")
        if entry["type"] == "joints":
            for joint in (entry.get("targets") or {}):
                _require(joint in model.joint_index, f"{p}.targets",
                         f"unknown joint {joint!r}")
        if entry["type"] == "gear":
            for g, gear in enumerate(entry.get("gears") or []):
                for key in ("target", "source"):
                    _require(gear.get(key) in model.joint_index, f"{p}.gears[{g}]",
                             f"unknown joint {gear.get(key)!r}")
        for key in ("mask", "orientation_mask"):
            if entry.get(key) is not None:
                mask = str(entry[key]).lower()
                _require(mask and all(c in "xyz" for c in mask), f"{p}.{key}",
                         f"mask must be a nonempty subset of 'xyz', got {entry[key]!r}")
        if entry.get("waypoints") is not None:
            _require(entry["type"] in ("position", "com"), f"{p}.waypoints",
                     "waypoints only apply to position and com tasks")
        if "weight" in entry:
            _require(float(entry["weight"]) > 0, f"{p}.weight", "must be positive")
        if "priority" in entry:
            _require(entry["priority"] in ("hard", "soft"), f"{p}.priority",
                     f"must be 'hard' or 'soft', got {entry['priority']!r}")
        scenario.tasks.append(entry)

    for i, entry in enumerate(doc.get("constraints") or []):
        p = f"constraints[{i}]"
        _known_keys(entry, CONSTRAINT_KEYS, p)
        kind_c = entry.get("type")
        _require(kind_c in ("com_polygon", "joint_limits", "velocity_limits",
                            "self_collision"), p, f"unknown constraint type {kind_c!r}")
        if kind_c == "com_polygon":
            has_vertices = "vertices" in entry
            has_frames = "frames" in entry
            _require(has_vertices != has_frames, p, "need vertices or frames")
            for frame in entry.get("frames") or []:
                _require(frame in model.frames, f"{p}.frames", f"unknown frame {frame!r}")
        if kind_c == "self_collision":
            for j, pair in enumerate(entry.get("pairs") or []):
                for link in pair:
                    _require(link in model.links, f"{p}.pairs[{j}]",
                             f"unknown link {link!r}")
        scenario.constraints.append(entry)

    for i, entry in enumerate(doc.get("outputs") or []):
        p = f"outputs[{i}]"
        _known_keys(entry, OUTPUT_KEYS, p)
        kind_o = entry.get("kind")
        _require(kind_o in ("frame", "com", "joints", "configuration"), p,
                 f"unknown output kind {kind_o!r}")
        if kind_o == "frame":
            _require(entry.get("frame") in model.frames, f"{p}.frame",
                     f"unknown frame {entry.get('frame')!r}")
        scenario.outputs.append(entry)

    task_names = {t["name"] for t in scenario.tasks}
    constraint_names = {c.get("name") for c in scenario.constraints if c.get("name")}
    for i, entry in enumerate(doc.get("checks") or []):
        p = f"checks[{i}]"
        _known_keys(entry, CHECK_KEYS, p)
        kind_k = entry.get("kind")
        _require(kind_k in ("hard_residuals", "frame_stationary", "polygon_margin",
                            "final_task_error", "task_residual", "waypoint_error",
                            "velocity_limits", "joint_limits", "gear_coupling"),
                 p, f"unknown check kind {kind_k!r}")
        if kind_k == "frame_stationary":
            _require(entry.get("frame") in model.frames, f"{p}.frame",
                     f"unknown frame {entry.get('frame')!r}")
        if kind_k in ("final_task_error", "task_residual", "waypoint_error",
                      "gear_coupling"):
            _require(entry.get("task") in task_names, f"{p}.task",
                     f"unknown task {entry.get('task')!r}")
        if kind_k == "polygon_margin":
            _require(entry.get("constraint") in constraint_names, f"{p}.constraint",
                     f"unknown constraint {entry.get('constraint')!r}")
        scenario.checks.append(entry)
    return scenario


# -- ik scenario assembly -----------------------------------------------------


def _resolve_target(entry, key, scenario, frame=None, dim=3):
    value = entry.get(key)
    if isinstance(value, str) and value == "initial":
        placement = scenario.model.frame_placement(scenario.initial, frame)
        return placement.translation.copy()
    return _vector(value, f"task {entry.get('name')}: {key}", dim)


def _target_placement(entry, scenario):
    frame = entry.get("frame") or entry.get("frame_b")
    if entry.get("target") == "initial":
        if entry.get("type", "").startswith("relative"):
            return scenario.model.relative_placement(
                scenario.initial, entry["frame_a"], entry["frame_b"]
            )
        return scenario.model.frame_placement(scenario.initial, frame)
    xyz = _vector(entry.get("target_xyz", [0, 0, 0]), "target_xyz")
    rpy = _vector(entry.get("target_rpy", [0, 0, 0]), "target_rpy")
    return Placement(rpy_matrix(*rpy), xyz)


def build_solver(scenario: Scenario) -> tuple[KinematicsSolver, dict]:
    """Instantiate the solver with every declared task and constraint.

    Returns the solver plus a mapping of task name -> (handle, waypoints).
    """
    solver = KinematicsSolver(
        scenario.model, dt=scenario.dt, configuration=scenario.initial
    )
    registry = {}
    for entry in scenario.tasks:
        kind = entry["type"]
        name = entry["name"]
        waypoints = None
        if entry.get("waypoints"):
            times = np.array([float(w["time"]) for w in entry["waypoints"]])
            values = np.array([_vector(w["value"], f"{name}.waypoints") for w in entry["waypoints"]])
            _require(np.all(np.diff(times) > 0), f"task {name}",
                     "waypoint times must increase")
            waypoints = Waypoints(times, values)
        if kind == "position":
            target = (waypoints.at(0.0) if waypoints
                      else _resolve_target(entry, "target", scenario, entry["frame"]))
            task = solver.add_position_task(entry["frame"], target)
        elif kind == "orientation":
            rpy = _vector(entry.get("target_rpy", [0, 0, 0]), f"{name}.target_rpy")
            task = solver.add_orientation_task(entry["frame"], rpy_matrix(*rpy))
        elif kind == "frame":
            task = solver.add_frame_task(entry["frame"], _target_placement(entry, scenario))
        elif kind == "relative_position":
            target = _resolve_target(entry, "target", scenario, entry["frame_b"])
            task = solver.add_relative_position_task(entry["frame_a"], entry["frame_b"], target)
        elif kind == "relative_orientation":
            rpy = _vector(entry.get("target_rpy", [0, 0, 0]), f"{name}.target_rpy")
            task = solver.add_relative_orientation_task(
                entry["frame_a"], entry["frame_b"], rpy_matrix(*rpy)
            )
        elif kind == "relative_frame":
            task = solver.add_relative_frame_task(
                entry["frame_a"], entry["frame_b"], _target_placement(entry, scenario)
            )
        elif kind == "com":
            target = (waypoints.at(0.0) if waypoints
                      else _vector(entry.get("target"), f"{name}.target"))
            task = solver.add_com_task(target)
        elif kind == "joints":
            task = solver.add_joints_task(entry.get("targets") or {})
        else:  # gear
            task = solver.add_gear_task()
            for gear in entry.get("gears") or []:
                task.add_gear(gear["target"], gear["source"], float(gear["ratio"]))
        task.configure(name, entry.get("priority", "soft"),
                       float(entry.get("weight", 1.0)))
        if entry.get("mask"):
            task.mask.set_axes(entry["mask"])
        if entry.get("orientation_mask"):
            task.orientation_mask.set_axes(entry["orientation_mask"])
        registry[name] = (task, waypoints)

    for entry in scenario.constraints:
        kind = entry["type"]
        name = entry.get("name")
        if kind == "com_polygon":
            if "frames" in entry:
                vertices = np.array([
                    scenario.model.frame_placement(scenario.initial, f).translation[:2]
                    for f in entry["frames"]
                ])
            else:
                vertices = np.array(entry["vertices"], dtype=float)
            handle = solver.add_com_polygon_constraint(
                vertices, float(entry.get("margin", 0.0))
            )
        elif kind == "joint_limits":
            handle = solver.enable_joint_limits()
        elif kind == "velocity_limits":
            handle = solver.enable_velocity_limits()
        else:  # self_collision
            handle = solver.add_self_collision_constraint(
                d_min=float(entry.get("margin", 0.0)),
                d_active=float(entry.get("activation", 0.05)),
                pairs=[tuple(p) for p in entry["pairs"]] if entry.get("pairs") else None,
            )
        handle.configure(name or handle.name, entry.get("priority", "hard"),
                         float(entry.get("weight", 1.0)))
    return solver, registry


# -- recording ------------------------------------------------------------------


def _output_columns(scenario):
    columns = []
    for entry in scenario.outputs:
        kind = entry["kind"]
        if kind == "frame":
            frame = entry["frame"]
            columns.extend(f"{frame}_{axis}" for axis in "xyz")
        elif kind == "com":
            columns.extend(f"com_{axis}" for axis in "xyz")
        elif kind == "joints":
            columns.extend(scenario.model.actuated_joints)
        else:  # configuration
            columns.extend(f"base_{c}" for c in ("x", "y", "z", "wx", "wy", "wz"))
            columns.extend(f"q_{j}" for j in scenario.model.actuated_joints)
    return columns


def _output_values(scenario, model, q):
    from .rotations import so3_log

    placements = model.link_placements(q) if scenario.outputs else {}
    values = []
    for entry in scenario.outputs:
        kind = entry["kind"]
        if kind == "frame":
            frame = model.frame(entry["frame"])
            world = placements[frame.link].compose(frame.placement)
            values.extend(world.translation)
        elif kind == "com":
            values.extend(model.com(q))
        elif kind == "joints":
            values.extend(q.joints)
        else:
            values.extend(q.base.translation)
            values.extend(so3_log(q.base.rotation))
            values.extend(q.joints)
    return values


@dataclass
class CheckResult:
    description: str
    passed: bool
    detail: str


@dataclass
class RunResult:
    trajectory_path: str | None
    report_path: str | None
    checks: list[CheckResult]
    configurations: list[Configuration] = field(default_factory=list)
    records: list[list[float]] = field(default_factory=list)
    reports: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _write_rows(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(FLOAT_FORMAT % v for v in row) + "\n")


# -- ik scenario run ---------------------------------------------------------------


def run_ik_scenario(scenario, out_dir, dump_dir=None, max_steps=None,
                    tolerance=None, seed=None):
    solver, registry = build_solver(scenario)
    model = scenario.model
    steps = max_steps if max_steps is not None else scenario.steps
    tol = tolerance if tolerance is not None else scenario.tolerance

    columns = _output_columns(scenario)
    header = ["step", "time"] + columns
    rows = []
    configurations = [solver.q.copy()]
    step_reports = []
    rows.append([0, 0.0] + _output_values(scenario, model, solver.q))

    polygon_handles = {
        c.name: c for c in solver.constraints
        if c.__class__.__name__ == "ComPolygonConstraint"
    }

    for step in range(1, steps + 1):
        t = step * scenario.dt
        for name, (task, waypoints) in registry.items():
            if waypoints is not None:
                task.target = waypoints.at(t)
        solver.step()
        if dump_dir is not None:
            qp = solver.last_problem.compile()
            dump_standard_qp(qp, os.path.join(dump_dir, f"qp_{step:06d}.txt"))
        configurations.append(solver.q.copy())
        step_reports.append(solver.last_report)
        rows.append([step, t] + _output_values(scenario, model, solver.q))

    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(scenario.path))[0]
    if stem.endswith(".scenario"):
        stem = stem[: -len(".scenario")]
    trajectory_path = os.path.join(out_dir, f"{stem}_trajectory.csv")
    _write_rows(trajectory_path, header, rows)

    checks = _evaluate_ik_checks(scenario, solver, registry, configurations,
                                 step_reports, polygon_handles, tol)
    report_path = os.path.join(out_dir, f"{stem}_report.txt")
    _write_report(report_path, scenario, checks, step_reports, seed)
    return RunResult(trajectory_path, report_path, checks, configurations,
                     rows, step_reports)


def _evaluate_ik_checks(scenario, solver, registry, configurations, step_reports,
                        polygon_handles, tol):
    model = scenario.model
    results = []
    for entry in scenario.checks:
        kind = entry["kind"]
        if kind == "hard_residuals":
            threshold = float(entry.get("tolerance", tol))
            worst = max(
                (t.residual_after for report in step_reports for t in report.tasks
                 if t.priority == "hard"),
                default=0.0,
            )
            results.append(CheckResult(
                f"hard_residuals <= {threshold:g}", worst <= threshold,
                f"max {worst:.3e}"))
        elif kind == "frame_stationary":
            frame = entry["frame"]
            threshold = float(entry.get("tolerance", tol))
            reference = model.frame_placement(configurations[0], frame).translation
            worst = max(
                float(np.linalg.norm(
                    model.frame_placement(q, frame).translation - reference))
                for q in configurations
            )
            results.append(CheckResult(
                f"frame_stationary({frame}) <= {threshold:g}", worst <= threshold,
                f"max drift {worst:.3e}"))
        elif kind == "polygon_margin":
            handle = polygon_handles[entry["constraint"]]
            slack = float(entry.get("slack", 1e-8))
            worst = min(
                float(np.min(handle.margins(model.com(q)[:2])))
                for q in configurations
            )
            passed = worst >= handle.margin - slack
            results.append(CheckResult(
                f"polygon_margin({entry['constraint']}) >= {handle.margin:g} - {slack:g}",
                passed, f"min margin {worst:.6f}"))
        elif kind in ("final_task_error", "task_residual", "waypoint_error"):
            task, waypoints = registry[entry["task"]]
            threshold = float(entry.get("tolerance", tol))
            if kind == "final_task_error":
                _, e = task.linearize(model, configurations[-1])
                value = float(np.linalg.norm(e))
                passed = value <= threshold
                detail = f"final error {value:.3e}"
            elif kind == "task_residual":
                value = 0.0
                for q in configurations[1:]:
                    _, e = task.linearize(model, q)
                    value = max(value, float(np.linalg.norm(e)))
                passed = value <= threshold
                detail = f"max error {value:.3e}"
            else:  # waypoint_error
                value = 0.0
                saved_target = task.target
                for time, target in zip(waypoints.times, waypoints.values):
                    step = int(round(time / scenario.dt))
                    if step >= len(configurations):
                        continue
                    task.target = target
                    _, e = task.linearize(model, configurations[step])
                    value = max(value, float(np.linalg.norm(e)))
                task.target = saved_target
                passed = value <= threshold
                detail = f"max waypoint error {value:.3e}"
            results.append(CheckResult(
                f"{kind}({entry['task']}) <= {threshold:g}", passed, detail))
        elif kind == "velocity_limits":
            slack = float(entry.get("slack", 1e-9))
            worst = 0.0
            for prev, curr in zip(configurations, configurations[1:]):
                dq = curr.joints - prev.joints
                for name in model.actuated_joints:
                    joint = model.joint_by_name[name]
                    if joint.velocity is None:
                        continue
                    bound = joint.velocity * scenario.dt
                    worst = max(worst, abs(dq[model.joint_index[name]]) - bound)
            results.append(CheckResult(
                f"velocity_limits (slack {slack:g})", worst <= slack,
                f"max excess {worst:.3e}"))
        elif kind == "joint_limits":
            slack = float(entry.get("slack", 1e-9))
            worst = 0.0
            for q in configurations:
                for name in model.actuated_joints:
                    joint = model.joint_by_name[name]
                    value = q.joints[model.joint_index[name]]
                    if joint.lower is not None:
                        worst = max(worst, joint.lower - value)
                    if joint.upper is not None:
                        worst = max(worst, value - joint.upper)
            results.append(CheckResult(
                f"joint_limits (slack {slack:g})", worst <= slack,
                f"max excess {worst:.3e}"))
        else:  # gear_coupling
            task, _ = registry[entry["task"]]
            threshold = float(entry.get("tolerance", tol))
            _, e = task.linearize(model, configurations[-1])
            value = float(np.max(np.abs(e)))
            results.append(CheckResult(
                f"gear_coupling({entry['task']}) <= {threshold:g}",
                value <= threshold, f"final coupling error {value:.3e}"))
    return results


def _write_report(path, scenario, checks, step_reports, seed=None):
    lines = [f"scenario: {os.path.basename(scenario.path)}", f"kind: {scenario.kind}"]
    if seed is not None:
        lines.append(f"seed: {seed}")
    if scenario.kind == "ik":
        lines.append(f"model: {scenario.doc.get('model')}")
        lines.append(f"dt: {scenario.dt:g}  steps run: {len(step_reports)}")
        if step_reports:
            last = step_reports[-1]
            lines.append("final step tasks:")
            for task in last.tasks:
                lines.append(
                    f"  {task.name} [{task.priority}] error {task.error_before:.6e}"
                    f" residual {task.residual_after:.6e}"
                )
    lines.append("checks:")
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        lines.append(f"  [{status}] {check.description} ({check.detail})")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# -- problem scenario -------------------------------------------------------------


def build_problem(scenario: Scenario):
    problem = Problem()
    variable = problem.add_variable(scenario.variables)
    spec = scenario.integrator_spec
    integ = Integrator(
        variable,
        np.asarray(spec.get("initial_state", [0.0] * int(spec["order"])), dtype=float),
        int(spec["order"]),
        float(spec["dt"]),
    )
    handles = []
    for i, entry in enumerate(scenario.problem_constraints):
        state = int(entry["state"])
        try:
            if "step" in entry:
                expression = integ.expr(int(entry["step"]), state)
            else:
                expression = integ.expr_t(float(entry["time"]), state)
        except ValueError as exc:
            raise ScenarioError(f"constraints[{i}]: {exc}") from exc
        value = float(entry["value"])
        relation = entry["relation"]
        if relation in ("=", "=="):
            comparison = expression == value
        elif relation == "<=":
            comparison = expression <= value
        else:
            comparison = expression >= value
        handle = problem.add_constraint(comparison, label=f"constraints[{i}]")
        if entry.get("priority") == "soft":
            handle.configure("soft", float(entry.get("weight", 1.0)))
        handles.append((entry, handle))
    return problem, integ, handles


def run_problem_scenario(scenario, out_dir, dump_dir=None, tolerance=None, seed=None):
    tol = tolerance if tolerance is not None else 1e-6
    problem, integ, handles = build_problem(scenario)
    result = problem.solve()
    if dump_dir is not None:
        dump_standard_qp(problem.last_qp, os.path.join(dump_dir, "qp_000000.txt"))

    states = integ.simulate(result.x)
    header = ["step", "time"] + [f"y{d}" for d in range(integ.state_dim)]
    rows = [
        [k, k * integ.dt] + list(states[k]) for k in range(integ.steps + 1)
    ]
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(scenario.path))[0]
    trajectory_path = os.path.join(out_dir, f"{stem}_trajectory.csv")
    _write_rows(trajectory_path, header, rows)

    checks = []
    for entry, handle in handles:
        state = int(entry["state"])
        if "step" in entry:
            value = states[int(entry["step"]), state]
            where = f"step {entry['step']}"
        else:
            value = float(integ.expr_t(float(entry["time"]), state).value(result.x_full))
            where = f"t={entry['time']}"
        target = float(entry["value"])
        relation = entry["relation"]
        if entry.get("priority") == "soft":
            checks.append(CheckResult(
                f"soft constraint y{state} at {where}", True,
                f"value {value:.6f} (relaxed)"))
            continue
        if relation in ("=", "=="):
            passed = abs(value - target) <= tol
        elif relation == "<=":
            passed = value <= target + tol
        else:
            passed = value >= target - tol
        checks.append(CheckResult(
            f"y{state} at {where} {relation} {target:g}", passed,
            f"value {value:.9f}"))

    report_path = os.path.join(out_dir, f"{stem}_report.txt")
    _write_report(report_path, scenario, checks, [], seed)
    return RunResult(trajectory_path, report_path, checks, [], rows, [])


def run_scenario(path, out_dir, dump_dir=None, max_steps=None, tolerance=None,
                 seed=None):
    scenario = load_scenario(path)
    if dump_dir is not None:
        os.makedirs(dump_dir, exist_ok=True)
    if scenario.kind == "problem":
        return run_problem_scenario(scenario, out_dir, dump_dir, tolerance, seed)
    return run_ik_scenario(scenario, out_dir, dump_dir, max_steps, tolerance, seed)


# -- check (dry-run) mode -----------------------------------------------------------


def describe_scenario(path) -> str:
    """Validate and report QP dimensions without running the scenario."""
    scenario = load_scenario(path)
    if scenario.kind == "problem":
        problem, integ, _ = build_problem(scenario)
        qp = problem.compile()
    else:
        solver, _ = build_solver(scenario)
        problem = solver.assemble()
        qp = problem.compile()
    rank = np.linalg.matrix_rank(qp.A) if qp.A.shape[0] else 0
    n_slack = qp.dimension - qp.n_user
    lines = [
        f"scenario: {os.path.basename(path)}",
        f"kind: {scenario.kind}",
        f"decision variables: {qp.n_user}",
        f"equality rows: {qp.A.shape[0]}",
        f"inequality rows: {qp.G.shape[0]}",
        f"slack variables: {n_slack}",
        f"reduced dimension after elimination: {qp.dimension - rank}",
    ]
    return "\n".join(lines)
