"""Local approach sampling around the user's pose and batch grasp evaluation.

Only positions are sampled: every candidate sits on the hemisphere pointing
at its origin, on circles of increasing angular offset from the user's
direction. Candidate (pose, flexion) pairs are simulated independently,
optionally across worker processes, and assembled in a canonical order so
results are bit-identical for any worker count.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .contacts import ContactPoint
from .errors import UserPoseOffSphere
from .geometry.hemisphere import HemisphereSpec, roll_of, surface_pose, tangent_basis
from .geometry.pose import Pose
from .hand import HandModel
from .sim.grasp import OUTCOME_SUCCESS, GraspOutcome, simulate_grasp
from .sim.scene import PhysicsParams, Scene

POWER_FLEXIONS = (0.0, 0.1)
PRECISION_FLEXIONS = (0.1, 0.2, 0.25, 0.3, 0.35)
MODE_HEIGHT_THRESHOLD = 0.08

STATUS_FILTERED = "FilteredBelowSurface"


def select_mode(object_height: float, threshold: float = MODE_HEIGHT_THRESHOLD) -> str:
    """power for tall objects, precision for short ones; ties go to power."""
    if object_height < 0:
        raise ValueError("object height must be >= 0")
    return "power" if object_height >= threshold else "precision"


def flexion_set(mode: str) -> list[float]:
    """Approach pre-shape flexions sampled per mode."""
    if mode == "power":
        return list(POWER_FLEXIONS)
    if mode == "precision":
        return list(PRECISION_FLEXIONS)
    raise ValueError(f"unknown mode: {mode}")


@dataclass(frozen=True)
class SamplingSpec:
    """Local sampling layout; counts and angular region are user-adjustable."""

    n_circumferences: int = 3
    angle_min: float = 0.0  # degrees, exclusive
    angle_max: float = 10.0  # degrees, inclusive
    points_per_circumference: int = 8
    flexions: tuple[float, ...] | None = None  # None -> flexion_set(mode)
    include_user_pose: bool = True
    preserve_user_roll: bool = True

    def __post_init__(self):
        if not (0.0 <= self.angle_min < self.angle_max <= 90.0):
            raise ValueError("need 0 <= angle_min < angle_max <= 90")
        if self.n_circumferences < 0 or self.points_per_circumference < 0:
            raise ValueError("counts must be >= 0")
        if self.flexions is not None:
            fl = tuple(float(f) for f in self.flexions)
            if any(not (0.0 <= f <= 1.0) for f in fl):
                raise ValueError("flexions must lie in [0, 1]")
            object.__setattr__(self, "flexions", fl)

    def to_dict(self) -> dict:
        return {
            "n_circumferences": self.n_circumferences,
            "angle_min": self.angle_min,
            "angle_max": self.angle_max,
            "points_per_circumference": self.points_per_circumference,
            "flexions": list(self.flexions) if self.flexions is not None else None,
            "include_user_pose": self.include_user_pose,
            "preserve_user_roll": self.preserve_user_roll,
        }

    @staticmethod
    def from_dict(d: dict) -> "SamplingSpec":
        fl = d.get("flexions")
        return SamplingSpec(
            n_circumferences=int(d.get("n_circumferences", 3)),
            angle_min=float(d.get("angle_min", 0.0)),
            angle_max=float(d.get("angle_max", 10.0)),
            points_per_circumference=int(d.get("points_per_circumference", 8)),
            flexions=tuple(fl) if fl is not None else None,
            include_user_pose=bool(d.get("include_user_pose", True)),
            preserve_user_roll=bool(d.get("preserve_user_roll", True)),
        )


WIDE_SAMPLING = SamplingSpec(angle_max=30.0)  # preset for low-precision input devices


@dataclass(frozen=True)
class ApproachSample:
    direction: np.ndarray
    angular_offset: float  # degrees from the user direction
    azimuth_index: int  # -1 for the user pose itself
    pose: Pose | None  # None when filtered below the base plane
    filtered: bool


def sample_approaches(
    user_pose: Pose, hemi: HemisphereSpec, spec: SamplingSpec = SamplingSpec()
) -> list[ApproachSample]:
    """Circles of evenly spaced directions around the user's, filtered at the base.

    Directions below the hemisphere base plane are kept as filtered markers;
    valid ones become on-sphere, origin-pointing poses with the user's roll.
    """
    rel = user_pose.position - hemi.center
    if abs(float(np.linalg.norm(rel)) - hemi.radius) > 1e-6:
        raise UserPoseOffSphere("user pose is not on the hemisphere")
    u = rel / np.linalg.norm(rel)
    roll = roll_of(hemi, user_pose) if spec.preserve_user_roll else 0.0
    out: list[ApproachSample] = []
    if spec.include_user_pose:
        out.append(ApproachSample(u, 0.0, -1, surface_pose(hemi, u, roll), False))
    t1, t2 = tangent_basis(u, hemi.up_axis)
    m = spec.points_per_circumference
    for c in range(1, spec.n_circumferences + 1):
        offset_deg = spec.angle_min + c * (spec.angle_max - spec.angle_min) / spec.n_circumferences
        psi = math.radians(offset_deg)
        for k in range(m):
            theta = 2.0 * math.pi * k / m
            d = math.cos(psi) * u + math.sin(psi) * (
                math.cos(theta) * t1 + math.sin(theta) * t2
            )
            d = d / np.linalg.norm(d)
            if float(d @ hemi.up_axis) < -1e-12:
                out.append(ApproachSample(d, offset_deg, k, None, True))
            else:
                out.append(ApproachSample(d, offset_deg, k, surface_pose(hemi, d, roll), False))
    return out


@dataclass(frozen=True)
class GraspCandidate:
    """One (approach pose, flexion) evaluation."""

    approach_pose: Pose | None
    angular_offset: float
    azimuth_index: int
    flexion: float
    status: str  # Success | Unstable | NoContact | ObstacleCollision | FilteredBelowSurface
    epsilon: float = 0.0
    contacts: tuple[ContactPoint, ...] = field(default_factory=tuple)
    hand_pose_at_grasp: Pose | None = None

    def to_dict(self, with_contacts: bool = True) -> dict:
        d = {
            "approach_pose": self.approach_pose.to_dict() if self.approach_pose else None,
            "angular_offset": self.angular_offset,
            "azimuth_index": self.azimuth_index,
            "flexion": self.flexion,
            "status": self.status,
            "epsilon": self.epsilon,
            "hand_pose_at_grasp": (
                self.hand_pose_at_grasp.to_dict() if self.hand_pose_at_grasp else None
            ),
        }
        if with_contacts:
            d["contacts"] = [c.to_dict() for c in self.contacts]
        return d

    @staticmethod
    def from_dict(d: dict) -> "GraspCandidate":
        return GraspCandidate(
            approach_pose=Pose.from_dict(d["approach_pose"]) if d.get("approach_pose") else None,
            angular_offset=float(d["angular_offset"]),
            azimuth_index=int(d["azimuth_index"]),
            flexion=float(d["flexion"]),
            status=str(d["status"]),
            epsilon=float(d.get("epsilon", 0.0)),
            contacts=tuple(ContactPoint.from_dict(c) for c in d.get("contacts", [])),
            hand_pose_at_grasp=(
                Pose.from_dict(d["hand_pose_at_grasp"]) if d.get("hand_pose_at_grasp") else None
            ),
        )


@dataclass(frozen=True)
class PlanResult:
    candidates: tuple[GraspCandidate, ...]
    best_index: int | None
    mode: str
    cone_edges: int
    torque_scale: float
    reference: tuple[float, float, float]
    timing_s: float = 0.0

    @property
    def best(self) -> GraspCandidate | None:
        return self.candidates[self.best_index] if self.best_index is not None else None

    def success_count(self) -> int:
        return sum(1 for c in self.candidates if c.status == OUTCOME_SUCCESS)

    def simulated_count(self) -> int:
        return sum(1 for c in self.candidates if c.status != STATUS_FILTERED)

    def to_json(self, include_timing: bool = True, with_contacts: bool = True) -> str:
        d = {
            "mode": self.mode,
            "cone_edges": self.cone_edges,
            "torque_scale": self.torque_scale,
            "reference": list(self.reference),
            "best_index": self.best_index,
            "candidates": [c.to_dict(with_contacts) for c in self.candidates],
        }
        if include_timing:
            d["timing_s"] = self.timing_s
        return json.dumps(d)

    @staticmethod
    def from_json(text: str) -> "PlanResult":
        d = json.loads(text)
        return PlanResult(
            candidates=tuple(GraspCandidate.from_dict(c) for c in d["candidates"]),
            best_index=d.get("best_index"),
            mode=d["mode"],
            cone_edges=int(d["cone_edges"]),
            torque_scale=float(d["torque_scale"]),
            reference=tuple(d["reference"]),
            timing_s=float(d.get("timing_s", 0.0)),
        )


_WORKER_CTX: tuple | None = None


def _init_worker(scene, hand, mode, sim_kwargs):
    global _WORKER_CTX
    _WORKER_CTX = (scene, hand, mode, sim_kwargs)


def _eval_task(task):
    idx, pose, flexion = task
    scene, hand, mode, sim_kwargs = _WORKER_CTX
    return idx, simulate_grasp(scene, hand, pose, flexion, mode, **sim_kwargs)


def plan(
    scene: Scene,
    hand: HandModel,
    user_pose: Pose,
    hemi: HemisphereSpec,
    spec: SamplingSpec = SamplingSpec(),
    params: PhysicsParams | None = None,
    worker_count: int = 1,
    cone_edges: int = 8,
    **sim_kwargs,
) -> PlanResult:
    """Evaluate all (approach, flexion) pairs; pick the best successful grasp.

    Ties on epsilon break toward smaller angular offset, then smaller flexion.
    best is None when nothing succeeds (callers run the retry flow).
    """
    if worker_count < 1:
        raise ValueError("worker_count must be >= 1")
    if params is not None:
        scene = replace(scene, physics=params)
    t0 = time.perf_counter()
    samples = sample_approaches(user_pose, hemi, spec)
    flexions = list(spec.flexions) if spec.flexions is not None else flexion_set(hemi.mode)
    sim_kwargs = dict(sim_kwargs)
    sim_kwargs.setdefault("cone_edges", cone_edges)

    entries: list[tuple[ApproachSample, float]] = [
        (s, f) for s in samples for f in flexions
    ]
    tasks = [
        (i, s.pose, f) for i, (s, f) in enumerate(entries) if not s.filtered
    ]
    outcomes: dict[int, GraspOutcome] = {}
    if worker_count == 1 or len(tasks) <= 1:
        _init_worker(scene, hand, hemi.mode, sim_kwargs)
        for t in tasks:
            idx, outcome = _eval_task(t)
            outcomes[idx] = outcome
    else:
        chunk = max(1, len(tasks) // (worker_count * 4))
        with ProcessPoolExecutor(
            max_workers=worker_count,
            initializer=_init_worker,
            initargs=(scene, hand, hemi.mode, sim_kwargs),
        ) as pool:
            for idx, outcome in pool.map(_eval_task, tasks, chunksize=chunk):
                outcomes[idx] = outcome

    candidates = []
    for i, (s, f) in enumerate(entries):
        if s.filtered:
            candidates.append(
                GraspCandidate(None, s.angular_offset, s.azimuth_index, f, STATUS_FILTERED)
            )
            continue
        o = outcomes[i]
        candidates.append(
            GraspCandidate(
                s.pose, s.angular_offset, s.azimuth_index, f,
                o.status, o.epsilon, tuple(o.contacts), o.hand_pose_at_grasp,
            )
        )
    best_index = None
    best_key = None
    for i, c in enumerate(candidates):
        if c.status != OUTCOME_SUCCESS:
            continue
        key = (-c.epsilon, c.angular_offset, c.flexion, c.azimuth_index)
        if best_key is None or key < best_key:
            best_key, best_index = key, i
    return PlanResult(
        candidates=tuple(candidates),
        best_index=best_index,
        mode=hemi.mode,
        cone_edges=cone_edges,
        torque_scale=scene.torque_scale,
        reference=tuple(scene.reference_point.tolist()),
        timing_s=time.perf_counter() - t0,
    )
