"""Task-space inverse kinematics on top of the QP layer.

Every task linearizes to a pair ``(J, e)`` with ``J = de/d(dq)``, so a hard
task contributes the equality ``e + J dq = 0`` and a soft task the objective
``w * ||e + J dq||^2``.  Constraints linearize to canonical inequality rows
``g + G dq <= 0``.  One solve is a constrained Gauss-Newton step; iterating
``step()`` against a fixed target is the convergence mechanism.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleError, ModelError, UnknownNameError
from .expressions import Expression
from .model import Configuration, RigidBodyModel, integrate_config
from .problem import Problem
from .rotations import Placement, so3_left_jacobian_inverse, so3_log

DEFAULT_EPSILON = 1e-6

_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}


class AxisMask:
    """Selects components of a 3-vector error block."""

    def __init__(self, axes: str = "xyz"):
        self._indices = [0, 1, 2]
        self.set_axes(axes)

    def set_axes(self, axes: str):
        for c in axes.lower():
            if c not in _AXIS_INDEX:
                raise ValueError(f"unknown axis {c!r}, expected letters from 'xyz'")
        indices = sorted({_AXIS_INDEX[c] for c in axes.lower()})
        if not indices:
            raise ValueError("axis mask cannot be empty; disable the task instead")
        self._indices = indices
        return self

    @property
    def indices(self) -> list[int]:
        return list(self._indices)

    def apply(self, J, e):
        return J[self._indices], e[self._indices]

    def __repr__(self):
        return f"AxisMask({''.join('xyz'[i] for i in self._indices)!r})"


def _as_target_placement(target) -> Placement:
    if isinstance(target, Placement):
        return target
    arr = np.asarray(target, dtype=float)
    if arr.shape == (4, 4):
        return Placement.from_matrix(arr)
    raise ValueError("frame targets must be a Placement or a 4x4 matrix")


class Task:
    """Base class: priority bookkeeping shared by all task kinds."""

    def __init__(self, name: str):
        self.name = name
        self.priority = "soft"
        self.weight = 1.0
        self.enabled = True

    def configure(self, name: str, priority: str, weight: float = 1.0):
        if priority not in ("hard", "soft"):
            raise ValueError(f"priority must be 'hard' or 'soft', got {priority!r}")
        if priority == "soft" and not weight > 0:
            raise ValueError("soft tasks need a positive weight")
        self.name = name
        self.priority = priority
        self.weight = float(weight)
        return self

    def linearize(self, model: RigidBodyModel, q: Configuration):
        raise NotImplementedError


class PositionTask(Task):
    def __init__(self, frame: str, target, name: str):
        super().__init__(name)
        self.frame = frame
        self.target = np.asarray(target, dtype=float).reshape(3)
        self.mask = AxisMask()

    def linearize(self, model, q):
        placement = model.frame_placement(q, self.frame)
        Jt, _ = model.frame_jacobian(q, self.frame)
        e = self.target - placement.translation
        return self.mask.apply(-Jt, e)


class OrientationTask(Task):
    def __init__(self, frame: str, target_rotation, name: str):
        super().__init__(name)
        self.frame = frame
        self.target = np.asarray(target_rotation, dtype=float).reshape(3, 3)
        self.mask = AxisMask()

    def linearize(self, model, q):
        placement = model.frame_placement(q, self.frame)
        _, Jr = model.frame_jacobian(q, self.frame)
        e = so3_log(self.target.T @ placement.rotation)
        # d/d(dq) Log(Rt^T Exp(w) R) = Jl_inv(e) Rt^T w with w = Jr dq.
        J = so3_left_jacobian_inverse(e) @ self.target.T @ Jr
        return self.mask.apply(J, e)


class FrameTask(Task):
    """Position and orientation blocks kept decoupled (not a 6D screw)."""

    def __init__(self, frame: str, target, name: str):
        super().__init__(name)
        target = _as_target_placement(target)
        self.position = PositionTask(frame, target.translation, name + ".position")
        self.orientation = OrientationTask(frame, target.rotation, name + ".orientation")
        self.position_weight = None
        self.orientation_weight = None

    @property
    def frame(self) -> str:
        return self.position.frame

    @property
    def mask(self) -> AxisMask:
        return self.position.mask

    @property
    def orientation_mask(self) -> AxisMask:
        return self.orientation.mask

    def configure(self, name: str, priority: str, weight: float = 1.0):
        super().configure(name, priority, weight)
        self.position.name = f"{name}.position"
        self.orientation.name = f"{name}.orientation"
        return self

    def set_target(self, target):
        target = _as_target_placement(target)
        self.position.target = target.translation
        self.orientation.target = target.rotation

    def blocks(self):
        return (self.position, self.orientation)

    def linearize(self, model, q):
        Jp, ep = self.position.linearize(model, q)
        Jo, eo = self.orientation.linearize(model, q)
        return np.vstack([Jp, Jo]), np.concatenate([ep, eo])


class RelativePositionTask(Task):
    def __init__(self, frame_a: str, frame_b: str, target, name: str):
        super().__init__(name)
        self.frame_a = frame_a
        self.frame_b = frame_b
        self.target = np.asarray(target, dtype=float).reshape(3)
        self.mask = AxisMask()

    def linearize(self, model, q):
        rel = model.relative_placement(q, self.frame_a, self.frame_b)
        Jt, _ = model.relative_jacobian(q, self.frame_a, self.frame_b)
        e = self.target - rel.translation
        return self.mask.apply(-Jt, e)


class RelativeOrientationTask(Task):
    def __init__(self, frame_a: str, frame_b: str, target_rotation, name: str):
        super().__init__(name)
        self.frame_a = frame_a
        self.frame_b = frame_b
        self.target = np.asarray(target_rotation, dtype=float).reshape(3, 3)
        self.mask = AxisMask()

    def linearize(self, model, q):
        rel = model.relative_placement(q, self.frame_a, self.frame_b)
        _, Jr = model.relative_jacobian(q, self.frame_a, self.frame_b)
        e = so3_log(self.target.T @ rel.rotation)
        J = so3_left_jacobian_inverse(e) @ self.target.T @ Jr
        return self.mask.apply(J, e)


class RelativeFrameTask(Task):
    def __init__(self, frame_a: str, frame_b: str, target, name: str):
        super().__init__(name)
        target = _as_target_placement(target)
        self.position = RelativePositionTask(
            frame_a, frame_b, target.translation, name + ".position"
        )
        self.orientation = RelativeOrientationTask(
            frame_a, frame_b, target.rotation, name + ".orientation"
        )
        self.position_weight = None
        self.orientation_weight = None

    @property
    def mask(self) -> AxisMask:
        return self.position.mask

    @property
    def orientation_mask(self) -> AxisMask:
        return self.orientation.mask

    def configure(self, name: str, priority: str, weight: float = 1.0):
        super().configure(name, priority, weight)
        self.position.name = f"{name}.position"
        self.orientation.name = f"{name}.orientation"
        return self

    def blocks(self):
        return (self.position, self.orientation)

    def linearize(self, model, q):
        Jp, ep = self.position.linearize(model, q)
        Jo, eo = self.orientation.linearize(model, q)
        return np.vstack([Jp, Jo]), np.concatenate([ep, eo])


class ComTask(Task):
    def __init__(self, target, name: str):
        super().__init__(name)
        self.target = np.asarray(target, dtype=float).reshape(3)
        self.mask = AxisMask()

    def linearize(self, model, q):
        e = self.target - model.com(q)
        J = -model.com_jacobian(q)
        return self.mask.apply(J, e)


class JointsTask(Task):
    def __init__(self, name: str):
        super().__init__(name)
        self.targets: dict[str, float] = {}

    def set_joints(self, targets: dict):
        self.targets.update({str(k): float(v) for k, v in targets.items()})
        return self

    def linearize(self, model, q):
        if not self.targets:
            raise ModelError(f"joints task {self.name!r} has no targets")
        rows = len(self.targets)
        J = np.zeros((rows, model.nv))
        e = np.zeros(rows)
        for i, (joint, target) in enumerate(sorted(self.targets.items())):
            if joint not in model.joint_index:
                raise UnknownNameError(f"unknown joint {joint!r}")
            col = 6 + model.joint_index[joint]
            e[i] = target - q.joints[model.joint_index[joint]]
            J[i, col] = -1.0
        return J, e


class GearTask(Task):
    """Linear couplings: each controlled joint tracks a weighted joint sum."""

    def __init__(self, name: str):
        super().__init__(name)
        self.ratios: dict[str, dict[str, float]] = {}

    def add_gear(self, target_joint: str, source_joint: str, ratio: float):
        self.ratios.setdefault(target_joint, {})[source_joint] = float(ratio)
        return self

    def linearize(self, model, q):
        if not self.ratios:
            raise ModelError(f"gear task {self.name!r} has no gears")
        rows = len(self.ratios)
        J = np.zeros((rows, model.nv))
        e = np.zeros(rows)
        for i, (target, sources) in enumerate(sorted(self.ratios.items())):
            if target not in model.joint_index:
                raise UnknownNameError(f"unknown joint {target!r}")
            value = q.joints[model.joint_index[target]]
            J[i, 6 + model.joint_index[target]] = 1.0
            for source, ratio in sorted(sources.items()):
                if source not in model.joint_index:
                    raise UnknownNameError(f"unknown joint {source!r}")
                value -= ratio * q.joints[model.joint_index[source]]
                J[i, 6 + model.joint_index[source]] -= ratio
            e[i] = value
        return J, e


# -- constraints ---------------------------------------------------------------


class IKConstraint:
    def __init__(self, name: str):
        self.name = name
        self.priority = "hard"
        self.weight = 1.0
        self.enabled = True

    def configure(self, name: str, priority: str, weight: float = 1.0):
        if priority not in ("hard", "soft"):
            raise ValueError(f"priority must be 'hard' or 'soft', got {priority!r}")
        if priority == "soft" and not weight > 0:
            raise ValueError("soft constraints need a positive weight")
        self.name = name
        self.priority = priority
        self.weight = float(weight)
        return self

    def linearize(self, model, q, dt):
        """Return (G, g) with rows enforcing g + G dq <= 0."""
        raise NotImplementedError


class JointRangeConstraint(IKConstraint):
    """Position bounds on actuated joints; unbounded joints contribute nothing."""

    def linearize(self, model, q, dt):
        rows_G, rows_g = [], []
        for name in model.actuated_joints:
            joint = model.joint_by_name[name]
            idx = model.joint_index[name]
            col = 6 + idx
            if joint.lower is not None:
                row = np.zeros(model.nv)
                row[col] = -1.0
                rows_G.append(row)
                rows_g.append(joint.lower - q.joints[idx])
            if joint.upper is not None:
                row = np.zeros(model.nv)
                row[col] = 1.0
                rows_G.append(row)
                rows_g.append(q.joints[idx] - joint.upper)
        if not rows_G:
            return np.zeros((0, model.nv)), np.zeros(0)
        return np.vstack(rows_G), np.array(rows_g)


class VelocityLimitConstraint(IKConstraint):
    """|dq_j| <= qdot_max * dt on actuated joints with a declared limit."""

    def linearize(self, model, q, dt):
        rows_G, rows_g = [], []
        for name in model.actuated_joints:
            joint = model.joint_by_name[name]
            if joint.velocity is None:
                continue
            bound = joint.velocity * dt
            col = 6 + model.joint_index[name]
            for sign in (1.0, -1.0):
                row = np.zeros(model.nv)
                row[col] = sign
                rows_G.append(row)
                rows_g.append(-bound)
        if not rows_G:
            return np.zeros((0, model.nv)), np.zeros(0)
        return np.vstack(rows_G), np.array(rows_g)


class ComPolygonConstraint(IKConstraint):
    """Horizontal CoM projection stays inside a clockwise convex polygon."""

    def __init__(self, vertices, name: str, margin: float = 0.0):
        super().__init__(name)
        vertices = np.asarray(vertices, dtype=float)
        if vertices.ndim != 2 or vertices.shape[0] < 3:
            raise ValueError("polygon needs at least 3 vertices")
        if vertices.shape[1] == 3:
            vertices = vertices[:, :2]
        if vertices.shape[1] != 2:
            raise ValueError("polygon vertices must be 2D (or 3D, xy taken)")
        n = vertices.shape[0]
        edges = vertices[(np.arange(n) + 1) % n] - vertices
        lengths = np.linalg.norm(edges, axis=1)
        if np.any(lengths < 1e-12):
            raise ValueError("polygon has a zero-length edge")
        # Shoelace sum is negative for clockwise vertex order.
        area2 = float(
            np.sum(vertices[:, 0] * np.roll(vertices[:, 1], -1)
                   - np.roll(vertices[:, 0], -1) * vertices[:, 1])
        )
        if area2 >= 0:
            raise ValueError("polygon vertices must be ordered clockwise")
        if not margin >= 0:
            raise ValueError("margin must be nonnegative")
        rot = np.array([[0.0, 1.0], [-1.0, 0.0]])
        self.vertices = vertices
        self.normals = (rot @ (edges / lengths[:, None]).T).T  # unit inward normals
        self.margin = float(margin)

    def margins(self, point_xy) -> np.ndarray:
        """Inward distance to each edge line (>= margin when satisfied)."""
        return np.einsum("ij,ij->i", self.normals, point_xy - self.vertices)

    def linearize(self, model, q, dt):
        com_xy = model.com(q)[:2]
        J_xy = model.com_jacobian(q)[:2]
        g = self.margin - self.margins(com_xy)
        G = -self.normals @ J_xy
        return G, g


class SelfCollisionConstraint(IKConstraint):
    """Distance rows for declared pairs closer than the activation distance."""

    def __init__(self, name: str, d_min: float = 0.0, d_active: float = 0.05, pairs=None):
        super().__init__(name)
        if not d_min >= 0:
            raise ValueError("d_min must be nonnegative")
        if not d_active > d_min:
            raise ValueError("d_active must exceed d_min")
        self.d_min = float(d_min)
        self.d_active = float(d_active)
        self.pairs = list(pairs) if pairs is not None else None

    def linearize(self, model, q, dt):
        pairs = self.pairs if self.pairs is not None else model.collision_pairs
        rows_G, rows_g = [], []
        for link_a, link_b in pairs:
            d, p_a, p_b = model.collision_distance(q, (link_a, link_b))
            if d > self.d_active:
                continue
            gap = p_b - p_a
            norm = np.linalg.norm(gap)
            direction = gap / norm if norm > 1e-12 else np.array([1.0, 0.0, 0.0])
            if d < 0:
                direction = -direction
            J_a = model.point_jacobian(q, link_a, p_a)
            J_b = model.point_jacobian(q, link_b, p_b)
            rows_G.append(direction @ (J_a - J_b))
            rows_g.append(self.d_min - d)
        if not rows_G:
            return np.zeros((0, model.nv)), np.zeros(0)
        return np.vstack(rows_G), np.array(rows_g)


# -- reporting -------------------------------------------------------------------


@dataclass
class TaskReport:
    name: str
    priority: str
    weight: float
    rows: int
    error_before: float  # max-norm of e at the linearization point
    residual_after: float  # max-norm of e + J dq at the solution


@dataclass
class ConstraintReport:
    name: str
    priority: str
    rows: int
    max_violation: float  # max over rows of g + G dq (should be <= ~0)
    slack: np.ndarray | None


@dataclass
class StepReport:
    dq: np.ndarray
    tasks: list[TaskReport] = field(default_factory=list)
    constraints: list[ConstraintReport] = field(default_factory=list)
    iterations: int = 0
    kkt_residual: float = 0.0

    def task(self, name: str) -> TaskReport:
        for entry in self.tasks:
            if entry.name == name:
                return entry
        raise KeyError(name)


# -- the solver --------------------------------------------------------------------


class KinematicsSolver:
    """Maintains a configuration and a registry of tasks and constraints."""

    def __init__(
        self,
        model: RigidBodyModel,
        dt: float = 0.01,
        epsilon: float = DEFAULT_EPSILON,
        configuration: Configuration | None = None,
    ):
        if not dt > 0:
            raise ValueError("dt must be positive")
        if not epsilon > 0:
            raise ValueError("epsilon must be positive")
        self.model = model
        self.dt = float(dt)
        self.epsilon = float(epsilon)
        self.q = configuration.copy() if configuration else model.neutral_configuration()
        self.tasks: list[Task] = []
        self.constraints: list[IKConstraint] = []
        self.last_report: StepReport | None = None
        self.last_problem: Problem | None = None

    # -- registry builders -------------------------------------------------------

    def _register_task(self, task: Task) -> Task:
        if any(t.name == task.name for t in self.tasks):
            raise ValueError(f"duplicate task label {task.name!r}")
        self.tasks.append(task)
        return task

    def _register_constraint(self, constraint: IKConstraint) -> IKConstraint:
        if any(c.name == constraint.name for c in self.constraints):
            raise ValueError(f"duplicate constraint label {constraint.name!r}")
        self.constraints.append(constraint)
        return constraint

    def _auto_name(self, stem: str) -> str:
        taken = {t.name for t in self.tasks} | {c.name for c in self.constraints}
        if stem not in taken:
            return stem
        i = 2
        while f"{stem}_{i}" in taken:
            i += 1
        return f"{stem}_{i}"

    def add_position_task(self, frame: str, target) -> PositionTask:
        self.model.frame(frame)
        return self._register_task(
            PositionTask(frame, target, self._auto_name(f"position:{frame}"))
        )

    def add_orientation_task(self, frame: str, target_rotation) -> OrientationTask:
        self.model.frame(frame)
        return self._register_task(
            OrientationTask(frame, target_rotation, self._auto_name(f"orientation:{frame}"))
        )

    def add_frame_task(self, frame: str, target) -> FrameTask:
        self.model.frame(frame)
        return self._register_task(
            FrameTask(frame, target, self._auto_name(f"frame:{frame}"))
        )

    def add_relative_position_task(self, frame_a: str, frame_b: str, target):
        self.model.frame(frame_a)
        self.model.frame(frame_b)
        return self._register_task(
            RelativePositionTask(
                frame_a, frame_b, target, self._auto_name(f"relative_position:{frame_a}:{frame_b}")
            )
        )

    def add_relative_orientation_task(self, frame_a: str, frame_b: str, target_rotation):
        self.model.frame(frame_a)
        self.model.frame(frame_b)
        return self._register_task(
            RelativeOrientationTask(
                frame_a,
                frame_b,
                target_rotation,
                self._auto_name(f"relative_orientation:{frame_a}:{frame_b}"),
            )
        )

    def add_relative_frame_task(self, frame_a: str, frame_b: str, target):
        self.model.frame(frame_a)
        self.model.frame(frame_b)
        return self._register_task(
            RelativeFrameTask(
                frame_a, frame_b, target, self._auto_name(f"relative_frame:{frame_a}:{frame_b}")
            )
        )

    def add_com_task(self, target) -> ComTask:
        return self._register_task(ComTask(target, self._auto_name("com")))

    def add_joints_task(self, targets: dict | None = None) -> JointsTask:
        task = JointsTask(self._auto_name("joints"))
        if targets:
            task.set_joints(targets)
        return self._register_task(task)

    def add_gear_task(self) -> GearTask:
        return self._register_task(GearTask(self._auto_name("gear")))

    def add_com_polygon_constraint(self, vertices, margin: float = 0.0):
        return self._register_constraint(
            ComPolygonConstraint(vertices, self._auto_name("com_polygon"), margin)
        )

    def add_self_collision_constraint(
        self, d_min: float = 0.0, d_active: float = 0.05, pairs=None
    ):
        return self._register_constraint(
            SelfCollisionConstraint(self._auto_name("self_collision"), d_min, d_active, pairs)
        )

    def enable_joint_limits(self, enabled: bool = True):
        existing = [c for c in self.constraints if isinstance(c, JointRangeConstraint)]
        if enabled and not existing:
            return self._register_constraint(JointRangeConstraint("joint_limits"))
        for c in existing:
            c.enabled = enabled
        return existing[0] if existing else None

    def enable_velocity_limits(self, enabled: bool = True):
        existing = [c for c in self.constraints if isinstance(c, VelocityLimitConstraint)]
        if enabled and not existing:
            return self._register_constraint(VelocityLimitConstraint("velocity_limits"))
        for c in existing:
            c.enabled = enabled
        return existing[0] if existing else None

    # -- assembly and solving -------------------------------------------------------

    def _task_blocks(self):
        """Flatten composite tasks; yields (owner, block) pairs."""
        for task in self.tasks:
            if not task.enabled:
                continue
            if isinstance(task, (FrameTask, RelativeFrameTask)):
                for block, block_weight in (
                    (task.position, task.position_weight),
                    (task.orientation, task.orientation_weight),
                ):
                    yield task, block, block_weight
            else:
                yield task, task, None

    def assemble(self) -> Problem:
        """Build the QP for the current configuration without solving it."""
        problem, _, _ = self._assemble()
        return problem

    def _assemble(self):
        model, q = self.model, self.q
        names = [t.name for t in self.tasks if t.enabled]
        names += [c.name for c in self.constraints if c.enabled]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ValueError(f"duplicate task labels: {duplicates}")
        problem = Problem()
        dq = problem.add_variable(model.nv)

        linearized = []
        for owner, block, block_weight in self._task_blocks():
            J, e = block.linearize(model, q)
            if J.shape[0] == 0:
                continue
            expr = Expression(J, e)
            weight = block_weight if block_weight is not None else owner.weight
            if owner.priority == "hard":
                problem.add_constraint(expr, "==", label=block.name)
            else:
                problem.add_objective(expr, weight)
            linearized.append((owner, block, J, e))

        constraint_rows = []
        for constraint in self.constraints:
            if not constraint.enabled:
                continue
            G, g = constraint.linearize(model, q, self.dt)
            if G.shape[0] == 0:
                constraint_rows.append((constraint, G, g, None))
                continue
            expr = Expression(G, g)
            handle = problem.add_constraint(expr, "<=", label=constraint.name)
            if constraint.priority == "soft":
                handle.configure("soft", constraint.weight)
            constraint_rows.append((constraint, G, g, handle))

        problem.add_objective(dq.expr, self.epsilon)
        return problem, linearized, constraint_rows

    def solve(self) -> tuple[np.ndarray, StepReport]:
        """Assemble the QP for the current configuration and solve it."""
        problem, linearized, constraint_rows = self._assemble()
        self.last_problem = problem

        try:
            result = problem.solve()
        except InfeasibleError as exc:
            if exc.label:
                raise InfeasibleError(
                    f"hard {exc.kind} rows of {exc.label!r} are unsatisfiable",
                    row=exc.row,
                    kind=exc.kind,
                    label=exc.label,
                ) from exc
            raise
        dq_value = result.x

        report = StepReport(
            dq=dq_value,
            iterations=result.solver.iterations,
            kkt_residual=result.solver.kkt_residual,
        )
        for owner, block, J, e in linearized:
            residual = e + J @ dq_value
            report.tasks.append(
                TaskReport(
                    name=block.name,
                    priority=owner.priority,
                    weight=owner.weight,
                    rows=len(e),
                    error_before=float(np.max(np.abs(e))) if len(e) else 0.0,
                    residual_after=float(np.max(np.abs(residual))) if len(e) else 0.0,
                )
            )
        diagnostics = {d.label: d for d in result.constraints}
        for constraint, G, g, handle in constraint_rows:
            if handle is None:
                report.constraints.append(
                    ConstraintReport(constraint.name, constraint.priority, 0, 0.0, None)
                )
                continue
            value = g + G @ dq_value
            diag = diagnostics.get(constraint.name)
            report.constraints.append(
                ConstraintReport(
                    name=constraint.name,
                    priority=constraint.priority,
                    rows=len(g),
                    max_violation=float(np.max(value)),
                    slack=diag.slack if diag else None,
                )
            )
        self.last_report = report
        return dq_value, report

    def step(self) -> Configuration:
        """One Gauss-Newton step: solve, then integrate the increment."""
        dq, _ = self.solve()
        self.q = integrate_config(self.q, dq)
        return self.q
