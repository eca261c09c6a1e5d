"""Config-driven kinematic end-effector with a scalar flexion synergy.

A hand is a palm (capsule set) plus finger chains of revolute joints and
capsule links. A single flexion value in [0, 1] interpolates every joint
linearly from its open to its closed angle; the contact simulator may also
drive fingers individually during closing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import FlexionOutOfRange, SchemaError
from .geometry.pose import Pose

_AXIS_TOL = 1e-6


@dataclass(frozen=True)
class Capsule:
    """Line-segment-plus-radius collision volume in its parent frame."""

    p0: np.ndarray
    p1: np.ndarray
    radius: float
    mu: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "p0", np.asarray(self.p0, dtype=float).reshape(3))
        object.__setattr__(self, "p1", np.asarray(self.p1, dtype=float).reshape(3))
        if self.radius <= 0:
            raise SchemaError("capsule radius must be positive")


@dataclass(frozen=True)
class WorldCapsule:
    """Capsule in world frame, tagged with its source on the hand."""

    p0: np.ndarray
    p1: np.ndarray
    radius: float
    mu: float
    source: str  # "palm" or "finger<i>"
    finger: int | None = None
    link: int = 0


@dataclass(frozen=True)
class Joint:
    origin: Pose
    axis: np.ndarray
    lo: float
    hi: float

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float).reshape(3)
        if abs(float(np.linalg.norm(axis)) - 1.0) > _AXIS_TOL:
            raise SchemaError(f"joint axis must be unit length, got {axis}")
        object.__setattr__(self, "axis", axis)
        if self.lo > self.hi:
            raise SchemaError("joint range inverted")


@dataclass(frozen=True)
class FingerChain:
    base: Pose
    joints: tuple[Joint, ...]
    links: tuple[Capsule, ...]

    def __post_init__(self):
        if len(self.joints) != len(self.links):
            raise SchemaError(
                f"finger has {len(self.joints)} joints but {len(self.links)} links"
            )
        if not self.joints:
            raise SchemaError("finger needs at least one joint")


@dataclass(frozen=True)
class HandModel:
    name: str
    palm_offset: Pose
    palm_capsules: tuple[Capsule, ...]
    fingers: tuple[FingerChain, ...]
    open_pose: np.ndarray
    closed_pose: np.ndarray
    max_force_per_contact: float = 20.0

    def __post_init__(self):
        open_pose = np.asarray(self.open_pose, dtype=float).ravel()
        closed_pose = np.asarray(self.closed_pose, dtype=float).ravel()
        n = self.joint_count()
        if len(open_pose) != n or len(closed_pose) != n:
            raise SchemaError(
                f"open/closed poses must have {n} entries, got "
                f"{len(open_pose)}/{len(closed_pose)}"
            )
        object.__setattr__(self, "open_pose", open_pose)
        object.__setattr__(self, "closed_pose", closed_pose)
        if self.max_force_per_contact <= 0:
            raise SchemaError("max_force_per_contact must be positive")

    def joint_count(self) -> int:
        return sum(len(f.joints) for f in self.fingers)

    def finger_joint_slices(self) -> list[slice]:
        out, start = [], 0
        for f in self.fingers:
            out.append(slice(start, start + len(f.joints)))
            start += len(f.joints)
        return out

    def angles_at(self, flexion_per_finger: np.ndarray) -> np.ndarray:
        """Per-joint angles from per-finger flexions, clamped to joint ranges."""
        angles = np.empty(self.joint_count())
        for fi, sl in enumerate(self.finger_joint_slices()):
            f = float(flexion_per_finger[fi])
            angles[sl] = (1.0 - f) * self.open_pose[sl] + f * self.closed_pose[sl]
        for k, joint in enumerate(j for f in self.fingers for j in f.joints):
            angles[k] = min(max(angles[k], joint.lo), joint.hi)
        return angles

    def to_config(self) -> dict:
        return {
            "name": self.name,
            "palm_offset": self.palm_offset.to_dict(),
            "palm_capsules": [
                {"p0": c.p0.tolist(), "p1": c.p1.tolist(), "radius": c.radius, "mu": c.mu}
                for c in self.palm_capsules
            ],
            "fingers": [
                {
                    "base": f.base.to_dict(),
                    "joints": [
                        {
                            "origin": j.origin.to_dict(),
                            "axis": j.axis.tolist(),
                            "min": j.lo,
                            "max": j.hi,
                        }
                        for j in f.joints
                    ],
                    "links": [
                        {
                            "p0": c.p0.tolist(),
                            "p1": c.p1.tolist(),
                            "radius": c.radius,
                            "mu": c.mu,
                        }
                        for c in f.links
                    ],
                }
                for f in self.fingers
            ],
            "open_pose": self.open_pose.tolist(),
            "closed_pose": self.closed_pose.tolist(),
            "max_force_per_contact": self.max_force_per_contact,
        }


def _require(cfg: dict, key: str):
    if key not in cfg:
        raise SchemaError(f"missing field: {key}")
    return cfg[key]


def _pose_from(d) -> Pose:
    try:
        return Pose.from_dict(d)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad pose: {exc}") from exc


def _capsule_from(d: dict) -> Capsule:
    return Capsule(
        p0=np.array(_require(d, "p0"), dtype=float),
        p1=np.array(_require(d, "p1"), dtype=float),
        radius=float(_require(d, "radius")),
        mu=float(d.get("mu", 1.0)),
    )


def load_hand(config: str | dict | Path) -> HandModel:
    """Parse and validate a hand config (JSON text, dict, or file path)."""
    if isinstance(config, Path):
        config = config.read_text()
    if isinstance(config, str):
        try:
            config = json.loads(config)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise SchemaError("config must be a JSON object")
    try:
        fingers = tuple(
            FingerChain(
                base=_pose_from(_require(f, "base")),
                joints=tuple(
                    Joint(
                        origin=_pose_from(j.get("origin", Pose.identity().to_dict())),
                        axis=np.array(_require(j, "axis"), dtype=float),
                        lo=float(j.get("min", -math.pi)),
                        hi=float(j.get("max", math.pi)),
                    )
                    for j in _require(f, "joints")
                ),
                links=tuple(_capsule_from(c) for c in _require(f, "links")),
            )
            for f in _require(config, "fingers")
        )
        return HandModel(
            name=str(_require(config, "name")),
            palm_offset=_pose_from(config.get("palm_offset", Pose.identity().to_dict())),
            palm_capsules=tuple(_capsule_from(c) for c in config.get("palm_capsules", [])),
            fingers=fingers,
            open_pose=np.array(_require(config, "open_pose"), dtype=float),
            closed_pose=np.array(_require(config, "closed_pose"), dtype=float),
            max_force_per_contact=float(config.get("max_force_per_contact", 20.0)),
        )
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"invalid hand config: {exc}") from exc


def load_hand_file(path: str | Path) -> HandModel:
    return load_hand(Path(path))


def builtin_hand(name: str) -> HandModel:
    """Load a shipped fixture: 'three_finger' or 'parallel_jaw'."""
    ref = resources.files("hemigrasp.hands").joinpath(f"{name}.json")
    try:
        text = ref.read_text()
    except FileNotFoundError as exc:
        raise SchemaError(f"no built-in hand named {name!r}") from exc
    return load_hand(text)


def builtin_hand_names() -> list[str]:
    return ["three_finger", "parallel_jaw"]


def pose_fingers_per(
    hand: HandModel, flexions: np.ndarray, hand_pose: Pose
) -> list[WorldCapsule]:
    """World capsules with an individual flexion per finger."""
    flexions = np.asarray(flexions, dtype=float).ravel()
    if len(flexions) != len(hand.fingers):
        raise ValueError(f"need {len(hand.fingers)} flexions")
    if np.any(flexions < -1e-12) or np.any(flexions > 1.0 + 1e-12):
        raise FlexionOutOfRange(f"flexion outside [0, 1]: {flexions}")
    angles = hand.angles_at(np.clip(flexions, 0.0, 1.0))
    palm = hand_pose @ hand.palm_offset
    out: list[WorldCapsule] = []
    for cap in hand.palm_capsules:
        out.append(
            WorldCapsule(
                palm.apply_point(cap.p0), palm.apply_point(cap.p1),
                cap.radius, cap.mu, "palm", None, 0,
            )
        )
    slices = hand.finger_joint_slices()
    for fi, finger in enumerate(hand.fingers):
        T = palm @ finger.base
        for li, (joint, link) in enumerate(zip(finger.joints, finger.links)):
            theta = float(angles[slices[fi]][li])
            T = T @ joint.origin @ Pose.from_axis_angle(joint.axis, theta)
            out.append(
                WorldCapsule(
                    T.apply_point(link.p0), T.apply_point(link.p1),
                    link.radius, link.mu, f"finger{fi}", fi, li,
                )
            )
    return out


def pose_fingers(hand: HandModel, flexion: float, hand_pose: Pose) -> list[WorldCapsule]:
    """World capsules at a single shared flexion value."""
    if not (-1e-12 <= flexion <= 1.0 + 1e-12):
        raise FlexionOutOfRange(f"flexion {flexion} outside [0, 1]")
    return pose_fingers_per(hand, np.full(len(hand.fingers), float(flexion)), hand_pose)


def fingertip_positions(hand: HandModel, flexion: float, hand_pose: Pose) -> np.ndarray:
    """(n_fingers, 3) distal link endpoints; used by tests and the UI glyph."""
    caps = pose_fingers(hand, flexion, hand_pose)
    tips = {}
    for c in caps:
        if c.finger is not None:
            tips[c.finger] = c.p1
    return np.array([tips[i] for i in sorted(tips)])
