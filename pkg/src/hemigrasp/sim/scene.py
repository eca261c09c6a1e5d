"""Scene assembly: conditioned object geometry on a support plane, obstacles."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..geometry.convex import ConvexPart, convex_hull_part, decompose_convex
from ..geometry.mesh import TriMesh, load_mesh
from ..geometry.pose import Pose
from ..geometry.qem import decimate_qem


@dataclass(frozen=True)
class PhysicsParams:
    """Object physical parameters; defaults follow the simulator convention."""

    mass: float = 0.3
    mu_lateral: float = 0.3
    mu_rolling: float = 0.01  # stored for config fidelity; point contacts cannot use it
    mu_spinning: float = 0.01
    gravity: float = 9.81

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        for name in ("mu_lateral", "mu_rolling", "mu_spinning"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def to_dict(self) -> dict:
        return {
            "mass": self.mass,
            "mu_lateral": self.mu_lateral,
            "mu_rolling": self.mu_rolling,
            "mu_spinning": self.mu_spinning,
            "gravity": self.gravity,
        }

    @staticmethod
    def from_dict(d: dict) -> "PhysicsParams":
        return PhysicsParams(**{k: float(v) for k, v in d.items()})


@dataclass(frozen=True)
class Scene:
    """World model for planning: convex object parts, support plane, obstacles.

    All geometry is stored in world frame. `reference_point` is the wrench
    reference (object centroid) and `torque_scale` the 1/(max radius)
    normalization used by the quality metric.
    """

    parts: tuple[ConvexPart, ...]
    object_mesh: TriMesh  # conditioned mesh, world frame
    object_pose: Pose
    physics: PhysicsParams
    support_height: float
    obstacles: tuple[ConvexPart, ...] = field(default_factory=tuple)
    name: str = "scene"

    @property
    def reference_point(self) -> np.ndarray:
        return self.object_mesh.centroid()

    @property
    def torque_scale(self) -> float:
        ref = self.reference_point
        r = float(np.linalg.norm(self.object_mesh.vertices - ref, axis=1).max())
        return 1.0 / r if r > 1e-12 else 1.0

    def object_height(self) -> float:
        lo, hi = self.object_mesh.bounds()
        return float(hi[2] - lo[2])

    def with_execution_geometry(self, mesh_world: TriMesh, parts: tuple[ConvexPart, ...]) -> "Scene":
        """Same scene with different object geometry (plan-vs-reality split)."""
        return replace(self, object_mesh=mesh_world, parts=parts)


@dataclass(frozen=True)
class ConditionedObject:
    """Decimated mesh plus convex parts in object frame; reusable across poses."""

    mesh: TriMesh
    parts: tuple[ConvexPart, ...]

    @staticmethod
    def prepare(mesh: TriMesh, decimate_to: int = 1000, concavity_tol: float = 0.05) -> "ConditionedObject":
        conditioned = decimate_qem(mesh, decimate_to)
        return ConditionedObject(conditioned, tuple(decompose_convex(conditioned, concavity_tol)))

    def placed(
        self,
        object_pose: Pose,
        physics: PhysicsParams = PhysicsParams(),
        support_height: float = 0.0,
        obstacles: tuple[ConvexPart, ...] = (),
        name: str = "scene",
    ) -> Scene:
        return Scene(
            parts=tuple(p.transformed(object_pose) for p in self.parts),
            object_mesh=self.mesh.transformed(object_pose),
            object_pose=object_pose,
            physics=physics,
            support_height=support_height,
            obstacles=obstacles,
            name=name,
        )


def build_scene(
    object_mesh: TriMesh,
    object_pose: Pose = Pose.identity(),
    physics: PhysicsParams = PhysicsParams(),
    support_height: float = 0.0,
    obstacles: list[tuple[TriMesh, Pose]] | None = None,
    decimate_to: int = 1000,
    concavity_tol: float = 0.05,
    name: str = "scene",
) -> Scene:
    """Condition a raw mesh (decimate, decompose) and place it in the world."""
    conditioned = ConditionedObject.prepare(object_mesh, decimate_to, concavity_tol)
    obs = tuple(convex_hull_part(m.transformed(p)) for m, p in (obstacles or []))
    return conditioned.placed(object_pose, physics, support_height, obs, name)


def resting_pose(mesh: TriMesh, x: float, y: float, yaw: float, support_height: float) -> Pose:
    """Pose with the given xy/yaw whose minimum z sits on the support plane."""
    pose = Pose.from_axis_angle((0, 0, 1), yaw, (x, y, 0.0))
    lo, _ = mesh.transformed(pose).bounds()
    return Pose.from_axis_angle((0, 0, 1), yaw, (x, y, support_height - float(lo[2])))


def load_scene_file(path: str | Path, asset_root: str | Path | None = None) -> Scene:
    """Scene description: JSON with object mesh path, pose, physics, obstacles."""
    path = Path(path)
    root = Path(asset_root) if asset_root else path.parent
    cfg = json.loads(path.read_text())
    obj = cfg["object"]
    mesh = load_mesh(root / obj["mesh"])
    pose = Pose.from_dict(obj.get("pose", Pose.identity().to_dict()))
    physics = PhysicsParams.from_dict(obj.get("physics", {})) if obj.get("physics") else PhysicsParams()
    obstacles = [
        (load_mesh(root / o["mesh"]), Pose.from_dict(o.get("pose", Pose.identity().to_dict())))
        for o in cfg.get("obstacles", [])
    ]
    return build_scene(
        mesh,
        pose,
        physics,
        support_height=float(cfg.get("support_height", 0.0)),
        obstacles=obstacles,
        decimate_to=int(cfg.get("decimate_to", 1000)),
        concavity_tol=float(cfg.get("concavity_tol", 0.05)),
        name=cfg.get("name", path.stem),
    )
