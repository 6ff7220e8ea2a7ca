"""Analytic distance queries between sphere and capsule primitives.

Distances are signed: positive when separated, negative when the primitives
interpenetrate.  Witness points always lie on the primitive surfaces along
the line between the closest core points (centers or segment points).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import yaml

from .errors import ModelError
from .rotations import Placement, rpy_matrix

_AXES = {"x": np.array([1.0, 0.0, 0.0]), "y": np.array([0.0, 1.0, 0.0]), "z": np.array([0.0, 0.0, 1.0])}


@dataclass(frozen=True)
class Sphere:
    radius: float
    placement: Placement

    def core_segment(self, world: Placement):
        center = world.compose(self.placement).translation
        return center, center


@dataclass(frozen=True)
class Capsule:
    radius: float
    half_length: float
    axis: np.ndarray
    placement: Placement

    def core_segment(self, world: Placement):
        T = world.compose(self.placement)
        offset = T.rotation @ (self.axis * self.half_length)
        center = T.translation
        return center - offset, center + offset


def closest_point_on_segment(a, b, p):
    ab = b - a
    denom = float(ab @ ab)
    if denom < 1e-300:
        return a.copy()
    t = np.clip(float((p - a) @ ab) / denom, 0.0, 1.0)
    return a + t * ab


def closest_points_between_segments(p0, p1, q0, q1):
    """Closest points of two 3D segments (clamped quadratic minimization)."""
    d1 = p1 - p0
    d2 = q1 - q0
    r = p0 - q0
    a = float(d1 @ d1)
    e = float(d2 @ d2)
    f = float(d2 @ r)
    if a < 1e-300 and e < 1e-300:
        return p0.copy(), q0.copy()
    if a < 1e-300:
        t = np.clip(f / e, 0.0, 1.0)
        return p0.copy(), q0 + t * d2
    c = float(d1 @ r)
    if e < 1e-300:
        s = np.clip(-c / a, 0.0, 1.0)
        return p0 + s * d1, q0.copy()
    b = float(d1 @ d2)
    denom = a * e - b * b
    s = np.clip((b * f - c * e) / denom, 0.0, 1.0) if denom > 1e-300 else 0.0
    t = (b * s + f) / e
    if t < 0.0:
        t = 0.0
        s = np.clip(-c / a, 0.0, 1.0)
    elif t > 1.0:
        t = 1.0
        s = np.clip((b - c) / a, 0.0, 1.0)
    return p0 + s * d1, q0 + t * d2


def primitive_distance(prim_a, world_a: Placement, prim_b, world_b: Placement):
    """Signed distance and surface witness points for a primitive pair."""
    a0, a1 = prim_a.core_segment(world_a)
    b0, b1 = prim_b.core_segment(world_b)
    if np.array_equal(a0, a1) and np.array_equal(b0, b1):
        core_a, core_b = a0, b0
    elif np.array_equal(a0, a1):
        core_b = closest_point_on_segment(b0, b1, a0)
        core_a = a0
    elif np.array_equal(b0, b1):
        core_a = closest_point_on_segment(a0, a1, b0)
        core_b = b0
    else:
        core_a, core_b = closest_points_between_segments(a0, a1, b0, b1)

    gap = core_b - core_a
    core_distance = float(np.linalg.norm(gap))
    if core_distance > 1e-12:
        direction = gap / core_distance
    else:
        direction = np.array([1.0, 0.0, 0.0])
    distance = core_distance - prim_a.radius - prim_b.radius
    witness_a = core_a + prim_a.radius * direction
    witness_b = core_b - prim_b.radius * direction
    return distance, witness_a, witness_b


def _parse_placement(entry, path) -> Placement:
    xyz = np.asarray(entry.get("xyz", [0.0, 0.0, 0.0]), dtype=float)
    rpy = np.asarray(entry.get("rpy", [0.0, 0.0, 0.0]), dtype=float)
    if xyz.shape != (3,) or rpy.shape != (3,):
        raise ModelError(f"{path}: xyz and rpy must be 3-vectors")
    return Placement(rpy_matrix(*rpy), xyz)


def _parse_axis(value, path) -> np.ndarray:
    if isinstance(value, str):
        if value not in _AXES:
            raise ModelError(f"{path}: axis letter must be one of x, y, z")
        return _AXES[value]
    axis = np.asarray(value, dtype=float)
    if axis.shape != (3,):
        raise ModelError(f"{path}: axis must be a letter or a 3-vector")
    norm = np.linalg.norm(axis)
    if norm < 1e-12:
        raise ModelError(f"{path}: zero-length axis")
    return axis / norm


def _parse_primitive(entry, path):
    if not isinstance(entry, dict) or "type" not in entry:
        raise ModelError(f"{path}: primitives are mappings with a 'type' key")
    kind = entry["type"]
    placement = _parse_placement(entry, path)
    radius = entry.get("radius")
    if radius is None or not float(radius) > 0:
        raise ModelError(f"{path}: primitive needs a positive radius")
    radius = float(radius)
    if kind == "sphere":
        return Sphere(radius=radius, placement=placement)
    if kind == "capsule":
        half_length = entry.get("half_length")
        if half_length is None or not float(half_length) > 0:
            raise ModelError(f"{path}: capsule needs a positive half_length")
        axis = _parse_axis(entry.get("axis", "z"), path)
        return Capsule(
            radius=radius,
            half_length=float(half_length),
            axis=axis,
            placement=placement,
        )
    raise ModelError(f"{path}: unknown primitive type {kind!r}")


@dataclass
class CollisionConfig:
    """Primitives per link plus the pairs that are actually checked."""

    primitives: dict = field(default_factory=dict)  # link -> list of primitives
    pairs: list = field(default_factory=list)  # (link_a, link_b)


def parse_collision_config(text: str, link_names) -> CollisionConfig:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ModelError(f"collision sidecar is not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelError("collision sidecar must be a mapping")
    unknown = set(doc) - {"links", "pairs"}
    if unknown:
        raise ModelError(f"collision sidecar has unknown keys: {sorted(unknown)}")

    config = CollisionConfig()
    for link, entries in (doc.get("links") or {}).items():
        if link not in link_names:
            raise ModelError(f"links/{link}: unknown link")
        if not isinstance(entries, list):
            raise ModelError(f"links/{link}: expected a list of primitives")
        config.primitives[link] = [
            _parse_primitive(entry, f"links/{link}[{i}]")
            for i, entry in enumerate(entries)
        ]
    for i, pair in enumerate(doc.get("pairs") or []):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ModelError(f"pairs[{i}]: expected [link_a, link_b]")
        a, b = pair
        for link in (a, b):
            if link not in config.primitives:
                raise ModelError(
                    f"pairs[{i}]: link {link!r} carries no collision primitives"
                )
        config.pairs.append((a, b))
    return config
