"""Parser for the URDF subset used by the kinematics layer.

Supported elements: robot, link (inertial/mass/origin), joint
(origin/axis/limit/parent/child) with types revolute, continuous, prismatic
and fixed.  Visuals, meshes, materials and transmissions are ignored;
inertia tensors are parsed but unused (only mass and CoM offset matter).
"""

from __future__ import annotations

import xml.etree.ElementTree as ET

import numpy as np

from .errors import ModelError
from .model import Joint, Link, RigidBodyModel
from .rotations import Placement, rpy_matrix

SUPPORTED_JOINT_TYPES = ("revolute", "continuous", "prismatic", "fixed")


def _vector(text, path, expected=3):
    try:
        values = [float(v) for v in text.split()]
    except ValueError as exc:
        raise ModelError(f"{path}: cannot parse vector {text!r}") from exc
    if len(values) != expected:
        raise ModelError(f"{path}: expected {expected} values, got {len(values)}")
    return np.array(values)


def _origin(element, path) -> Placement:
    origin = element.find("origin")
    if origin is None:
        return Placement.identity()
    xyz = _vector(origin.get("xyz", "0 0 0"), f"{path}/origin")
    rpy = _vector(origin.get("rpy", "0 0 0"), f"{path}/origin")
    return Placement(rpy_matrix(*rpy), xyz)


def _parse_link(element, path) -> Link:
    name = element.get("name")
    if not name:
        raise ModelError(f"{path}: link without a name")
    mass = 0.0
    com = np.zeros(3)
    inertial = element.find("inertial")
    if inertial is not None:
        mass_el = inertial.find("mass")
        if mass_el is not None:
            try:
                mass = float(mass_el.get("value", "0"))
            except ValueError as exc:
                raise ModelError(f"{path}/inertial/mass: bad value") from exc
            if mass < 0:
                raise ModelError(f"{path}/inertial/mass: negative mass")
        com = _origin(inertial, f"{path}/inertial").translation
    return Link(name=name, mass=mass, com=com)


def _parse_joint(element, path, link_names) -> Joint:
    name = element.get("name")
    if not name:
        raise ModelError(f"{path}: joint without a name")
    kind = element.get("type")
    if kind not in SUPPORTED_JOINT_TYPES:
        raise ModelError(f"{path}[@name='{name}']: unsupported joint type {kind!r}")
    parent_el = element.find("parent")
    child_el = element.find("child")
    if parent_el is None or child_el is None:
        raise ModelError(f"{path}[@name='{name}']: missing parent or child element")
    parent = parent_el.get("link")
    child = child_el.get("link")
    for role, link in (("parent", parent), ("child", child)):
        if link not in link_names:
            raise ModelError(
                f"{path}[@name='{name}']/{role}: unknown link {link!r}"
            )
    origin = _origin(element, f"{path}[@name='{name}']")

    axis = None
    if kind != "fixed":
        axis = np.array([1.0, 0.0, 0.0])
        axis_el = element.find("axis")
        if axis_el is not None:
            axis = _vector(axis_el.get("xyz", "1 0 0"), f"{path}[@name='{name}']/axis")
        norm = np.linalg.norm(axis)
        if norm < 1e-12:
            raise ModelError(f"{path}[@name='{name}']/axis: zero-length axis")
        axis = axis / norm

    lower = upper = velocity = None
    limit_el = element.find("limit")
    if limit_el is not None and kind in ("revolute", "prismatic"):
        if limit_el.get("lower") is not None:
            lower = float(limit_el.get("lower"))
        if limit_el.get("upper") is not None:
            upper = float(limit_el.get("upper"))
        if lower is not None and upper is not None and lower > upper:
            raise ModelError(f"{path}[@name='{name}']/limit: lower > upper")
    if limit_el is not None and limit_el.get("velocity") is not None:
        velocity = float(limit_el.get("velocity"))
        if not velocity > 0:
            raise ModelError(f"{path}[@name='{name}']/limit: velocity must be > 0")

    return Joint(
        name=name,
        kind=kind,
        parent=parent,
        child=child,
        origin=origin,
        axis=axis,
        lower=lower,
        upper=upper,
        velocity=velocity,
    )


def load_urdf(text: str) -> RigidBodyModel:
    """Build a floating-base kinematic tree from URDF text."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise ModelError(f"malformed XML: {exc}") from exc
    if root.tag != "robot":
        raise ModelError(f"expected top-level <robot>, got <{root.tag}>")

    links = {}
    for element in root.findall("link"):
        link = _parse_link(element, "robot/link")
        if link.name in links:
            raise ModelError(f"robot/link[@name='{link.name}']: duplicate link name")
        links[link.name] = link
    if not links:
        raise ModelError("robot has no links")

    joints = []
    names = set()
    for element in root.findall("joint"):
        joint = _parse_joint(element, "robot/joint", links)
        if joint.name in names:
            raise ModelError(f"robot/joint[@name='{joint.name}']: duplicate joint name")
        names.add(joint.name)
        joints.append(joint)

    # Tree validation: unique root, one parent per link, no cycles.
    parent_joint = {}
    for joint in joints:
        if joint.child in parent_joint:
            raise ModelError(
                f"robot/joint[@name='{joint.name}']: link {joint.child!r} already"
                f" has parent joint {parent_joint[joint.child].name!r}"
                " (cycle in joint graph)"
            )
        parent_joint[joint.child] = joint
    roots = [name for name in links if name not in parent_joint]
    if not roots:
        raise ModelError(
            f"cycle in joint graph: no root link (joint {joints[0].name!r} participates)"
        )
    if len(roots) > 1:
        raise ModelError(f"joint graph is disconnected: multiple roots {sorted(roots)}")
    root_link = roots[0]

    reached = {root_link}
    frontier = [root_link]
    children = {}
    for joint in joints:
        children.setdefault(joint.parent, []).append(joint)
    while frontier:
        current = frontier.pop()
        for joint in children.get(current, []):
            if joint.child in reached:
                raise ModelError(
                    f"cycle in joint graph through joint {joint.name!r}"
                )
            reached.add(joint.child)
            frontier.append(joint.child)
    unreached = set(links) - reached
    if unreached:
        offending = [j.name for j in joints if j.child in unreached]
        raise ModelError(
            f"cycle in joint graph: links {sorted(unreached)} unreachable from"
            f" root {root_link!r} (joints {offending})"
        )

    return RigidBodyModel(root=root_link, links=links, joints=joints)


def load_urdf_file(path) -> RigidBodyModel:
    with open(path) as fh:
        return load_urdf(fh.read())
