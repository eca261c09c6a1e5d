"""Virtual approach hemisphere: construction, surface frames, steering basis.

The end-effector is constrained to the hemisphere surface with its approach
axis pointing at the hemisphere origin. The power-grasp hemisphere is raised
0.12 m above the support plane so side-on approaches clear the table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import BelowEquator, DegenerateObject
from .mesh import TriMesh
from .pose import Pose, quat_from_matrix

POWER_RISE = 0.12
DEFAULT_CLEARANCE = 0.15

_WORLD_UP = np.array([1.0, 0.0, 0.0])  # fallback when direction is parallel to up


def tangent_basis(direction, up=(0.0, 0.0, 1.0)) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic right-handed tangent frame (t1, t2) at a sphere direction.

    t1 is the projection of `up` onto the tangent plane (a fixed fallback axis
    when the direction is parallel to up); t2 = d x t1.
    """
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    up = np.asarray(up, dtype=float)
    ref = up - float(up @ d) * d
    n = np.linalg.norm(ref)
    if n < 1e-8:
        ref = _WORLD_UP - float(_WORLD_UP @ d) * d
        n = np.linalg.norm(ref)
    t1 = ref / n
    t2 = np.cross(d, t1)
    return t1, t2


@dataclass(frozen=True)
class HemisphereSpec:
    """Approach constraint surface around an object."""

    center: np.ndarray
    radius: float
    up_axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    base_height: float = 0.0
    mode: str = "precision"  # power | precision
    rise: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(3))
        up = np.asarray(self.up_axis, dtype=float).reshape(3)
        object.__setattr__(self, "up_axis", up / np.linalg.norm(up))
        if self.radius <= 0:
            raise ValueError("hemisphere radius must be positive")
        if self.mode not in ("power", "precision"):
            raise ValueError(f"unknown mode: {self.mode}")

    def direction_of(self, position) -> np.ndarray:
        v = np.asarray(position, dtype=float) - self.center
        return v / np.linalg.norm(v)

    def on_surface(self, position, tol: float = 1e-6) -> bool:
        v = np.asarray(position, dtype=float) - self.center
        return abs(math.sqrt(float(v @ v)) - self.radius) <= tol and float(v @ self.up_axis) >= -tol * self.radius

    def to_dict(self) -> dict:
        return {
            "center": self.center.tolist(),
            "radius": self.radius,
            "up_axis": self.up_axis.tolist(),
            "base_height": self.base_height,
            "mode": self.mode,
            "rise": self.rise,
        }

    @staticmethod
    def from_dict(d: dict) -> "HemisphereSpec":
        return HemisphereSpec(
            center=np.array(d["center"], dtype=float),
            radius=float(d["radius"]),
            up_axis=np.array(d.get("up_axis", [0, 0, 1]), dtype=float),
            base_height=float(d.get("base_height", 0.0)),
            mode=d.get("mode", "precision"),
            rise=float(d.get("rise", 0.0)),
        )


def hemisphere_for(
    object_mesh: TriMesh,
    object_pose: Pose,
    support_height: float,
    mode: str,
    clearance: float = DEFAULT_CLEARANCE,
) -> HemisphereSpec:
    """Hemisphere centered over the object; raised 0.12 m in power mode.

    Radius = max horizontal bounding radius + half the object height + clearance.
    """
    posed = object_mesh.transformed(object_pose)
    lo, hi = posed.bounds()
    if float(np.linalg.norm(hi - lo)) < 1e-12:
        raise DegenerateObject("object has zero bounding extent")
    centroid = posed.centroid()
    horiz = posed.vertices[:, :2] - centroid[:2]
    max_radius = float(np.sqrt((horiz**2).sum(axis=1)).max())
    height = float(hi[2] - lo[2])
    rise = POWER_RISE if mode == "power" else 0.0
    center = np.array([centroid[0], centroid[1], support_height + rise])
    return HemisphereSpec(
        center=center,
        radius=max_radius + 0.5 * height + clearance,
        up_axis=np.array([0.0, 0.0, 1.0]),
        base_height=support_height,
        mode=mode,
        rise=rise,
    )


def surface_pose(hemi: HemisphereSpec, direction, roll: float = 0.0) -> Pose:
    """Pose on the hemisphere surface with tool z pointing at the origin.

    The non-approach axes come from the up-axis tangent frame; `roll` rotates
    them about the approach axis.
    """
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    if float(d @ hemi.up_axis) < -1e-12:
        raise BelowEquator("direction points under the hemisphere base plane")
    t1, t2 = tangent_basis(d, hemi.up_axis)
    # base frame: x = t1, y = -t2, z = -d (right-handed, z toward center)
    cr, sr = math.cos(roll), math.sin(roll)
    x = cr * t1 + sr * (-t2)
    y = -sr * t1 + cr * (-t2)
    rot = np.column_stack([x, y, -d])
    return Pose(hemi.center + hemi.radius * d, quat_from_matrix(rot))


def roll_of(hemi: HemisphereSpec, pose: Pose) -> float:
    """Roll angle of a surface pose relative to the canonical frame."""
    d = hemi.direction_of(pose.position)
    t1, t2 = tangent_basis(d, hemi.up_axis)
    x = pose.axis_x()
    return math.atan2(float(x @ (-t2)), float(x @ t1))
