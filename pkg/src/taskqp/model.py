"""Floating-base rigid-body kinematics.

The configuration increment convention, used by every Jacobian here, is

    dq = [base linear (world, m), base angular (world, rad), joints]

with the base updating as ``t <- t + dq[0:3]`` and
``R <- Exp(dq[3:6]) @ R``.  The angular increment is expressed in the WORLD
frame; this makes the base columns of translational Jacobians
``[I, -skew(p - t_base)]`` in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .collisions import parse_collision_config, primitive_distance
from .errors import ModelError, UnknownNameError
from .rotations import Placement, _trusted_placement, skew, so3_exp


@dataclass
class Link:
    name: str
    mass: float
    com: np.ndarray  # CoM offset in the link frame
    primitives: list = field(default_factory=list)


@dataclass(frozen=True)
class Joint:
    name: str
    kind: str  # revolute | continuous | prismatic | fixed
    parent: str
    child: str
    origin: Placement
    axis: np.ndarray | None  # unit vector in the child frame, None for fixed
    lower: float | None
    upper: float | None
    velocity: float | None

    @property
    def actuated(self) -> bool:
        return self.kind != "fixed"


@dataclass(frozen=True)
class Frame:
    name: str
    link: str
    placement: Placement


@dataclass
class Configuration:
    base: Placement
    joints: np.ndarray

    def copy(self) -> "Configuration":
        return Configuration(self.base, self.joints.copy())


class RigidBodyModel:
    """Kinematic tree rooted at a floating base link."""

    def __init__(self, root: str, links: dict, joints: list):
        self.root = root
        self.links = links
        self.joints = list(joints)
        self.joint_by_name = {j.name: j for j in self.joints}
        self.parent_joint = {j.child: j for j in self.joints}
        self.actuated_joints = [j.name for j in self.joints if j.actuated]
        self.joint_index = {name: i for i, name in enumerate(self.actuated_joints)}
        self.frames: dict[str, Frame] = {}
        for name in links:
            self.frames[name] = Frame(name=name, link=name, placement=Placement.identity())
        self.collision_pairs: list[tuple[str, str]] = []
        # Chain of joints from the root to each link, in order.
        self._path: dict[str, list[Joint]] = {}
        for name in links:
            chain = []
            current = name
            while current != root:
                joint = self.parent_joint[current]
                chain.append(joint)
                current = joint.parent
            self._path[name] = list(reversed(chain))

    # -- structure ----------------------------------------------------------

    @property
    def n_joints(self) -> int:
        return len(self.actuated_joints)

    @property
    def nv(self) -> int:
        """Increment dimension: 6 base coordinates plus actuated joints."""
        return 6 + self.n_joints

    def add_frame(self, name: str, link: str, placement: Placement | None = None):
        if link not in self.links:
            raise UnknownNameError(f"unknown link {link!r}")
        if name in self.frames:
            raise ModelError(f"frame {name!r} already exists")
        self.frames[name] = Frame(name, link, placement or Placement.identity())

    def frame(self, name: str) -> Frame:
        try:
            return self.frames[name]
        except KeyError:
            raise UnknownNameError(f"unknown frame {name!r}") from None

    def joint(self, name: str) -> Joint:
        try:
            return self.joint_by_name[name]
        except KeyError:
            raise UnknownNameError(f"unknown joint {name!r}") from None

    def neutral_configuration(self, base: Placement | None = None) -> Configuration:
        return Configuration(base or Placement.identity(), np.zeros(self.n_joints))

    def attach_collisions(self, text: str):
        """Attach a collision sidecar document (primitives + checked pairs)."""
        config = parse_collision_config(text, set(self.links))
        for link, prims in config.primitives.items():
            self.links[link].primitives = list(prims)
        self.collision_pairs = list(config.pairs)

    # -- forward kinematics ---------------------------------------------------

    def _joint_motion(self, joint: Joint, value: float) -> Placement:
        if joint.kind == "fixed":
            return Placement.identity()
        if joint.kind == "prismatic":
            return _trusted_placement(np.eye(3), joint.axis * value)
        return _trusted_placement(so3_exp(joint.axis * value), np.zeros(3))

    def link_placements(self, q: Configuration) -> dict[str, Placement]:
        if q.joints.shape[0] != self.n_joints:
            raise ModelError(
                f"configuration has {q.joints.shape[0]} joints, model has {self.n_joints}"
            )
        placements = {self.root: q.base}
        pending = [j for j in self.joints]
        # Joints are tree edges; resolve parents before children.
        while pending:
            remaining = []
            for joint in pending:
                if joint.parent not in placements:
                    remaining.append(joint)
                    continue
                value = (
                    q.joints[self.joint_index[joint.name]] if joint.actuated else 0.0
                )
                placements[joint.child] = (
                    placements[joint.parent]
                    .compose(joint.origin)
                    .compose(self._joint_motion(joint, value))
                )
            if len(remaining) == len(pending):
                raise ModelError("joint graph is not a tree")
            pending = remaining
        return placements

    def frame_placement(self, q: Configuration, frame_name: str) -> Placement:
        frame = self.frame(frame_name)
        return self.link_placements(q)[frame.link].compose(frame.placement)

    # -- Jacobians ------------------------------------------------------------

    def _point_jacobians(self, q, placements, link: str, point_world):
        """Translational and rotational Jacobians of a point fixed to a link."""
        nv = self.nv
        Jt = np.zeros((3, nv))
        Jr = np.zeros((3, nv))
        Jt[:, 0:3] = np.eye(3)
        Jt[:, 3:6] = -skew(point_world - q.base.translation)
        Jr[:, 3:6] = np.eye(3)
        for joint in self._path[link]:
            if not joint.actuated:
                continue
            col = 6 + self.joint_index[joint.name]
            anchor = placements[joint.child]
            axis_world = anchor.rotation @ joint.axis
            if joint.kind == "prismatic":
                Jt[:, col] = axis_world
            else:
                Jt[:, col] = np.cross(axis_world, point_world - anchor.translation)
                Jr[:, col] = axis_world
        return Jt, Jr

    def point_jacobian(self, q: Configuration, link: str, point_world) -> np.ndarray:
        if link not in self.links:
            raise UnknownNameError(f"unknown link {link!r}")
        placements = self.link_placements(q)
        Jt, _ = self._point_jacobians(q, placements, link, np.asarray(point_world, dtype=float))
        return Jt

    def frame_jacobian(self, q: Configuration, frame_name: str):
        """World-frame Jacobians (Jt, Jr), each 3 x (6 + n).

        ``Jt dq`` is the first-order displacement of the frame origin and
        ``Jr dq`` the world angular increment ``delta`` with
        ``R <- Exp(delta) @ R``.
        """
        frame = self.frame(frame_name)
        placements = self.link_placements(q)
        point = placements[frame.link].compose(frame.placement).translation
        return self._point_jacobians(q, placements, frame.link, point)

    # -- relative quantities ----------------------------------------------------

    def relative_placement(self, q: Configuration, a: str, b: str) -> Placement:
        placements = self.link_placements(q)
        frame_a, frame_b = self.frame(a), self.frame(b)
        T_a = placements[frame_a.link].compose(frame_a.placement)
        T_b = placements[frame_b.link].compose(frame_b.placement)
        return T_a.inverse().compose(T_b)

    def relative_jacobian(self, q: Configuration, a: str, b: str):
        """First-order maps of the relative translation and rotation.

        Jt gives d(p_b in a-frame)/d(dq); Jr gives the a-frame angular
        increment of the relative rotation.
        """
        frame_a, frame_b = self.frame(a), self.frame(b)
        placements = self.link_placements(q)
        T_a = placements[frame_a.link].compose(frame_a.placement)
        T_b = placements[frame_b.link].compose(frame_b.placement)
        Jt_a, Jr_a = self._point_jacobians(q, placements, frame_a.link, T_a.translation)
        Jt_b, Jr_b = self._point_jacobians(q, placements, frame_b.link, T_b.translation)
        R_aT = T_a.rotation.T
        delta_p = T_b.translation - T_a.translation
        Jt_rel = R_aT @ (Jt_b - Jt_a + skew(delta_p) @ Jr_a)
        Jr_rel = R_aT @ (Jr_b - Jr_a)
        return Jt_rel, Jr_rel

    # -- center of mass -----------------------------------------------------------

    def total_mass(self) -> float:
        return sum(link.mass for link in self.links.values())

    def com(self, q: Configuration) -> np.ndarray:
        total = self.total_mass()
        if not total > 0:
            raise ModelError("model has zero total mass")
        placements = self.link_placements(q)
        weighted = np.zeros(3)
        for link in self.links.values():
            if link.mass == 0.0:
                continue
            weighted += link.mass * placements[link.name].transform_point(link.com)
        return weighted / total

    def com_jacobian(self, q: Configuration) -> np.ndarray:
        total = self.total_mass()
        if not total > 0:
            raise ModelError("model has zero total mass")
        placements = self.link_placements(q)
        J = np.zeros((3, self.nv))
        for link in self.links.values():
            if link.mass == 0.0:
                continue
            point = placements[link.name].transform_point(link.com)
            Jt, _ = self._point_jacobians(q, placements, link.name, point)
            J += link.mass * Jt
        return J / total

    # -- collision queries -----------------------------------------------------------

    def collision_distance(self, q: Configuration, pair):
        """Signed distance and witness points between two links' primitives."""
        link_a, link_b = pair
        for link in (link_a, link_b):
            if link not in self.links:
                raise UnknownNameError(f"unknown link {link!r}")
            if not self.links[link].primitives:
                raise ModelError(f"link {link!r} carries no collision primitives")
        placements = self.link_placements(q)
        best = None
        for prim_a in self.links[link_a].primitives:
            for prim_b in self.links[link_b].primitives:
                d, pa, pb = primitive_distance(
                    prim_a, placements[link_a], prim_b, placements[link_b]
                )
                if best is None or d < best[0]:
                    best = (d, pa, pb)
        return best


def integrate_config(q: Configuration, dq) -> Configuration:
    """Apply a configuration increment; base rotation updates on the manifold."""
    dq = np.asarray(dq, dtype=float)
    if not np.all(np.isfinite(dq)):
        raise ValueError("configuration increment must be finite")
    if dq.shape[0] != 6 + q.joints.shape[0]:
        raise ModelError(
            f"increment has {dq.shape[0]} entries, expected {6 + q.joints.shape[0]}"
        )
    base = Placement(
        so3_exp(dq[3:6]) @ q.base.rotation,
        q.base.translation + dq[0:3],
    )
    return Configuration(base, q.joints + dq[6:])
