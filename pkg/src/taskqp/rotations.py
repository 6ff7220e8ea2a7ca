"""Rotation-group helpers: exponential/logarithm maps and rigid placements."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ORTHONORMALITY_TOL = 1e-9


def skew(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def check_rotation(R, tol: float = ORTHONORMALITY_TOL) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got {R.shape}")
    if np.max(np.abs(R.T @ R - np.eye(3))) > tol:
        raise ValueError("matrix is not orthonormal")
    # Triple product replaces the determinant; the sign is all that matters.
    if float(np.cross(R[:, 0], R[:, 1]) @ R[:, 2]) < 0:
        raise ValueError("matrix has determinant -1 (improper rotation)")
    return R


def so3_exp(omega) -> np.ndarray:
    """Rodrigues formula; series expansion below 1e-8 radians."""
    omega = np.asarray(omega, dtype=float)
    angle = float(np.linalg.norm(omega))
    K = skew(omega)
    if angle < 1e-8:
        return np.eye(3) + K + 0.5 * (K @ K)
    s = np.sin(angle) / angle
    c = (1.0 - np.cos(angle)) / (angle * angle)
    return np.eye(3) + s * K + c * (K @ K)


def so3_log(R) -> np.ndarray:
    """Axis-angle coordinates of a rotation, with norm in [0, pi].

    Uses the antisymmetric part away from the antipode and a dedicated
    branch extracting the axis from the symmetric part when the angle
    approaches pi, where the antisymmetric part vanishes.
    """
    R = np.asarray(R, dtype=float)
    trace = float(np.trace(R))
    cos_angle = np.clip((trace - 1.0) / 2.0, -1.0, 1.0)
    angle = float(np.arccos(cos_angle))

    if angle < 1e-8:
        vee = 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
        return vee * (1.0 + angle * angle / 6.0)

    if angle > np.pi - 1e-4:
        # Near pi: R ~ I + 2 K^2 with K = skew(axis), so the symmetric part
        # pins the axis up to sign.
        S = 0.5 * (R + R.T)
        axis_sq = np.clip((np.diag(S) - cos_angle) / (1.0 - cos_angle), 0.0, None)
        axis = np.sqrt(axis_sq)
        k = int(np.argmax(axis))
        if axis[k] > 0:
            off = {0: (1, 2), 1: (0, 2), 2: (0, 1)}[k]
            for j in off:
                coupled = S[k, j] / (1.0 - cos_angle)
                axis[j] = np.copysign(axis[j], coupled) if axis[j] > 0 else 0.0
            axis[k] = abs(axis[k])
        vee = 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
        if np.dot(vee, axis) < 0:
            axis = -axis
        axis /= max(np.linalg.norm(axis), 1e-300)
        return angle * axis

    vee = 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    return vee * angle / np.sin(angle)


def so3_left_jacobian_inverse(omega) -> np.ndarray:
    """Inverse left Jacobian: d/dt Log(Exp(t d) Exp(w))|_0 = Jl_inv(w) d."""
    omega = np.asarray(omega, dtype=float)
    angle = float(np.linalg.norm(omega))
    K = skew(omega)
    if angle < 1e-6:
        return np.eye(3) - 0.5 * K + (1.0 / 12.0) * (K @ K)
    cot_term = 1.0 / (angle * angle) - (1.0 + np.cos(angle)) / (
        2.0 * angle * np.sin(angle)
    )
    return np.eye(3) - 0.5 * K + cot_term * (K @ K)


def rpy_matrix(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """URDF convention: R = Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    cr, sr = np.cos(roll), np.sin(roll)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cy, sy = np.cos(yaw), np.sin(yaw)
    Rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    Ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    Rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    return Rz @ Ry @ Rx


@dataclass(frozen=True)
class Placement:
    """Rigid transform: rotation plus translation, in meters."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "rotation", check_rotation(np.asarray(self.rotation, dtype=float))
        )
        t = np.asarray(self.translation, dtype=float).reshape(3)
        if not np.all(np.isfinite(t)):
            raise ValueError("translation must be finite")
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "Placement":
        return Placement(np.eye(3), np.zeros(3))

    @staticmethod
    def from_matrix(T) -> "Placement":
        T = np.asarray(T, dtype=float)
        if T.shape != (4, 4):
            raise ValueError(f"homogeneous transform must be 4x4, got {T.shape}")
        return Placement(T[:3, :3], T[:3, 3])

    def as_matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.rotation
        T[:3, 3] = self.translation
        return T

    def compose(self, other: "Placement") -> "Placement":
        # Products of validated rotations stay orthonormal; skip revalidation.
        return _trusted_placement(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "Placement":
        return _trusted_placement(
            self.rotation.T, -(self.rotation.T @ self.translation)
        )

    def transform_point(self, point) -> np.ndarray:
        return self.rotation @ np.asarray(point, dtype=float) + self.translation


def _trusted_placement(rotation, translation) -> Placement:
    """Placement constructor bypassing validation for internal products."""
    placement = object.__new__(Placement)
    object.__setattr__(placement, "rotation", rotation)
    object.__setattr__(placement, "translation", translation)
    return placement
