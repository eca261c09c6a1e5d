"""Rigid transforms: position + unit quaternion (w, x, y, z)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_QUAT_NORM_TOL = 1e-9


def quat_normalize(q):
    q = np.asarray(q, dtype=float)
    n = math.sqrt(float(q @ q))
    if n == 0.0:
        raise ValueError("zero quaternion")
    return q / n


def quat_mul(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_conj(q):
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q, v):
    """Rotate vector v by unit quaternion q."""
    w, x, y, z = q
    vx, vy, vz = float(v[0]), float(v[1]), float(v[2])
    # t = 2 q_vec x v
    tx = 2.0 * (y * vz - z * vy)
    ty = 2.0 * (z * vx - x * vz)
    tz = 2.0 * (x * vy - y * vx)
    # v' = v + w t + q_vec x t
    return np.array(
        [
            vx + w * tx + (y * tz - z * ty),
            vy + w * ty + (z * tx - x * tz),
            vz + w * tz + (x * ty - y * tx),
        ]
    )


def quat_from_axis_angle(axis, angle):
    axis = np.asarray(axis, dtype=float)
    n = math.sqrt(float(axis @ axis))
    if n == 0.0:
        raise ValueError("zero rotation axis")
    half = 0.5 * angle
    s = math.sin(half) / n
    return np.array([math.cos(half), axis[0] * s, axis[1] * s, axis[2] * s])


def quat_from_matrix(m):
    """Unit quaternion from a 3x3 rotation matrix (Shepperd's method)."""
    m = np.asarray(m, dtype=float)
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    if tr > 0.0:
        s = math.sqrt(tr + 1.0) * 2.0
        return quat_normalize(
            [0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s]
        )
    if m[0, 0] >= m[1, 1] and m[0, 0] >= m[2, 2]:
        s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
        return quat_normalize(
            [(m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s]
        )
    if m[1, 1] >= m[2, 2]:
        s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
        return quat_normalize(
            [(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s]
        )
    s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
    return quat_normalize(
        [(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s]
    )


def matrix_from_quat(q):
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_slerp(qa, qb, t):
    """Shortest-arc spherical interpolation between unit quaternions."""
    qa = np.asarray(qa, dtype=float)
    qb = np.asarray(qb, dtype=float)
    dot = float(qa @ qb)
    if dot < 0.0:
        qb = -qb
        dot = -dot
    if dot > 1.0 - 1e-12:
        return quat_normalize(qa + t * (qb - qa))
    theta = math.acos(min(1.0, dot))
    s = math.sin(theta)
    return quat_normalize(
        (math.sin((1.0 - t) * theta) / s) * qa + (math.sin(t * theta) / s) * qb
    )


@dataclass(frozen=True)
class Pose:
    """Rigid transform x -> R(q) x + p. Immutable; arrays are not copied."""

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    orientation: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))

    def __post_init__(self):
        p = np.asarray(self.position, dtype=float).reshape(3)
        q = np.asarray(self.orientation, dtype=float).reshape(4)
        n = math.sqrt(float(q @ q))
        if abs(n - 1.0) > _QUAT_NORM_TOL:
            if n == 0.0:
                raise ValueError("zero quaternion")
            q = q / n
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "orientation", q)

    @staticmethod
    def identity() -> "Pose":
        return Pose()

    @staticmethod
    def from_axis_angle(axis, angle, position=(0.0, 0.0, 0.0)) -> "Pose":
        return Pose(np.asarray(position, dtype=float), quat_from_axis_angle(axis, angle))

    @staticmethod
    def from_matrix(rotation, position=(0.0, 0.0, 0.0)) -> "Pose":
        return Pose(np.asarray(position, dtype=float), quat_from_matrix(rotation))

    def compose(self, other: "Pose") -> "Pose":
        """self ∘ other: apply other first, then self."""
        return Pose(
            self.position + quat_rotate(self.orientation, other.position),
            quat_mul(self.orientation, other.orientation),
        )

    def __matmul__(self, other: "Pose") -> "Pose":
        return self.compose(other)

    def inverse(self) -> "Pose":
        qc = quat_conj(self.orientation)
        return Pose(-quat_rotate(qc, self.position), qc)

    def apply_point(self, p) -> np.ndarray:
        return self.position + quat_rotate(self.orientation, p)

    def apply_vector(self, v) -> np.ndarray:
        return quat_rotate(self.orientation, v)

    def apply_points(self, pts: np.ndarray) -> np.ndarray:
        """Transform an (N, 3) array of points."""
        return np.asarray(pts, dtype=float) @ matrix_from_quat(self.orientation).T + self.position

    def rotation_matrix(self) -> np.ndarray:
        return matrix_from_quat(self.orientation)

    def axis_x(self) -> np.ndarray:
        return quat_rotate(self.orientation, (1.0, 0.0, 0.0))

    def axis_y(self) -> np.ndarray:
        return quat_rotate(self.orientation, (0.0, 1.0, 0.0))

    def axis_z(self) -> np.ndarray:
        return quat_rotate(self.orientation, (0.0, 0.0, 1.0))

    def interpolate(self, other: "Pose", s: float) -> "Pose":
        """Linear in position, shortest-arc slerp in orientation."""
        return Pose(
            (1.0 - s) * self.position + s * other.position,
            quat_slerp(self.orientation, other.orientation, s),
        )

    def almost_equal(self, other: "Pose", tol: float = 1e-9) -> bool:
        dq = min(
            float(np.abs(self.orientation - other.orientation).max()),
            float(np.abs(self.orientation + other.orientation).max()),
        )
        return bool(np.abs(self.position - other.position).max() <= tol and dq <= tol)

    def to_dict(self) -> dict:
        return {"position": self.position.tolist(), "orientation": self.orientation.tolist()}

    @staticmethod
    def from_dict(d: dict) -> "Pose":
        return Pose(np.array(d["position"], dtype=float), np.array(d["orientation"], dtype=float))
