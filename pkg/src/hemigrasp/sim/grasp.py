"""Quasi-static grasp execution: approach, back-off, finger closing, hold.

The hand translates along its approach axis in fixed increments until it has
enough qualifying contacts (the object stays fixed); skipped increments are
provably contact-free (conservative advancement bounded by the current
minimum separation), so results are identical to naive stepping. Closing
drives each finger's flexion up in fixed increments until its links touch
the object. Gravity enters only through the hold test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..geometry.pose import Pose
from ..hand import HandModel, pose_fingers_per
from ..quality import epsilon_quality, wrench_set
from .contact import (
    CONTACT_TOL,
    ContactPoint,
    min_separation,
    object_contacts,
    obstacle_hit,
    world_contacts,
)
from .hold import hold_test
from .scene import Scene

APPROACH_STEP = 0.001  # 1 mm
CLOSE_STEP = 0.005  # flexion increment
BACKOFF_MARGIN = 0.005  # 5 mm
MAX_TRAVEL = 0.6

STATUS_IN_PROGRESS = "InProgress"
STATUS_CONTACTED = "Contacted"
STATUS_NO_CONTACT = "NoContact"
STATUS_OBSTACLE = "ObstacleCollision"

OUTCOME_SUCCESS = "Success"
OUTCOME_UNSTABLE = "Unstable"


@dataclass(frozen=True)
class GraspState:
    """Hand pose, per-finger flexions, and contacts after a sim phase."""

    hand_pose: Pose
    flexions: np.ndarray
    contacts: list[ContactPoint]
    status: str
    travel: float = 0.0
    max_penetration: float = 0.0


@dataclass(frozen=True)
class GraspOutcome:
    """Full result of simulating one (approach pose, flexion) candidate."""

    status: str  # Success | Unstable | NoContact | ObstacleCollision
    epsilon: float
    contacts: list[ContactPoint]
    hand_pose_at_grasp: Pose | None
    final_flexions: np.ndarray | None
    approach_travel: float = 0.0


def _qualifying(contacts: list[ContactPoint], count_world: bool, count_palm: bool) -> int:
    n = 0
    for c in contacts:
        if c.is_world():
            n += 1 if count_world else 0
        elif c.source == "palm":
            n += 1 if count_palm else 0
        else:
            n += 1
    return n


def approach_until_contact(
    scene: Scene,
    hand: HandModel,
    start_pose: Pose,
    flexion: float,
    min_contacts: int,
    count_world: bool,
    step: float = APPROACH_STEP,
    max_travel: float = MAX_TRAVEL,
    tol: float = CONTACT_TOL,
    count_palm: bool = True,
) -> GraspState:
    """Translate along the approach axis until enough contacts (or blocked).

    Stops at the first increment with >= min_contacts qualifying contacts, or
    as soon as any penetration of the object or support plane exceeds the
    contact tolerance (the hand is physically blocked), so the stop pose
    never penetrates deeper than step + tol. Obstacle penetration aborts
    with ObstacleCollision.
    """
    axis = start_pose.axis_z()
    flex = np.full(len(hand.fingers), float(flexion))
    travel = 0.0
    while travel <= max_travel + 1e-12:
        pose = Pose(start_pose.position + travel * axis, start_pose.orientation)
        capsules = pose_fingers_per(hand, flex, pose)
        if scene.obstacles and obstacle_hit(capsules, scene.obstacles):
            return GraspState(pose, flex, [], STATUS_OBSTACLE, travel)
        contacts, deepest = object_contacts(capsules, scene.parts, scene.physics, tol)
        wc = world_contacts(capsules, scene.support_height, scene.physics, tol)
        if _qualifying(contacts + wc, count_world, count_palm) >= min_contacts:
            return GraspState(pose, flex, contacts + wc, STATUS_CONTACTED, travel, deepest)
        world_pen = max((-c.separation for c in wc), default=0.0)
        if max(deepest, world_pen) > tol:
            return GraspState(pose, flex, contacts + wc, STATUS_CONTACTED, travel, deepest)
        # conservative advancement: skipped configurations stay out of contact
        d = min_separation(
            capsules,
            scene.parts + scene.obstacles,
            scene.support_height,
        )
        if math.isinf(d):
            return GraspState(pose, flex, [], STATUS_NO_CONTACT, travel)
        n_steps = max(1, int(math.floor((d - tol) / step))) if d > tol + step else 1
        travel += n_steps * step
    pose = Pose(start_pose.position + min(travel, max_travel) * axis, start_pose.orientation)
    return GraspState(pose, flex, [], STATUS_NO_CONTACT, min(travel, max_travel))


def _finger_reach_bounds(hand: HandModel) -> np.ndarray:
    """Upper bound on link-point speed per unit flexion, per finger."""
    bounds = np.zeros(len(hand.fingers))
    slices = hand.finger_joint_slices()
    for fi, finger in enumerate(hand.fingers):
        sweep = np.abs(hand.closed_pose[slices[fi]] - hand.open_pose[slices[fi]])
        total = 0.0
        remaining = sum(
            float(np.linalg.norm(l.p1 - l.p0)) + l.radius for l in finger.links
        )
        for j, joint in enumerate(finger.joints):
            total += float(sweep[j]) * remaining
            link = finger.links[j]
            remaining -= float(np.linalg.norm(link.p1 - link.p0))
        bounds[fi] = max(total, 1e-9)
    return bounds


def close_fingers(
    scene: Scene,
    hand: HandModel,
    hand_pose: Pose,
    start_flexion: float | np.ndarray,
    d_flexion: float = CLOSE_STEP,
    tol: float = CONTACT_TOL,
) -> GraspState:
    """Increase each finger's flexion until its links touch the object.

    A finger already in contact keeps its starting flexion; fingers that
    never touch stop at flexion 1. Returns all contacts (fingers, palm,
    support plane) at the final configuration.
    """
    n = len(hand.fingers)
    flex = np.full(n, float(start_flexion)) if np.isscalar(start_flexion) else np.array(
        start_flexion, dtype=float
    )
    flex = np.clip(flex, 0.0, 1.0)
    reach = _finger_reach_bounds(hand)
    active = np.ones(n, dtype=bool)

    def finger_contact_dist(capsules) -> np.ndarray:
        """Min separation of each finger's links to the object parts."""
        d = np.full(n, np.inf)
        for cap in capsules:
            if cap.finger is None or not active[cap.finger]:
                continue
            d[cap.finger] = min(
                d[cap.finger], min_separation([cap], scene.parts, None, cap=d[cap.finger])
            )
        return d

    capsules = pose_fingers_per(hand, flex, hand_pose)
    d = finger_contact_dist(capsules)
    active &= ~(d <= tol)  # fingers already in contact stay put
    while active.any():
        # conservative advancement per finger, snapped to d_flexion increments
        steps = np.ones(n, dtype=np.int64)
        for fi in range(n):
            if active[fi] and np.isfinite(d[fi]) and d[fi] > tol:
                safe = (d[fi] - tol) / reach[fi] / d_flexion
                steps[fi] = max(1, int(math.floor(safe)))
        moved = False
        for fi in range(n):
            if active[fi] and flex[fi] < 1.0:
                flex[fi] = min(1.0, flex[fi] + steps[fi] * d_flexion)
                moved = True
        if not moved:
            break
        capsules = pose_fingers_per(hand, flex, hand_pose)
        d = finger_contact_dist(capsules)
        for fi in range(n):
            if active[fi] and (d[fi] <= tol or flex[fi] >= 1.0):
                active[fi] = False
    contacts, deepest = object_contacts(capsules, scene.parts, scene.physics, tol)
    wc = world_contacts(capsules, scene.support_height, scene.physics, tol)
    return GraspState(hand_pose, flex, contacts + wc, STATUS_CONTACTED, 0.0, deepest)


def simulate_grasp(
    scene: Scene,
    hand: HandModel,
    approach_pose: Pose,
    flexion: float,
    mode: str,
    backoff_margin: float = BACKOFF_MARGIN,
    cone_edges: int = 8,
    step: float = APPROACH_STEP,
    d_flexion: float = CLOSE_STEP,
    max_travel: float = MAX_TRAVEL,
    count_palm: bool = True,
) -> GraspOutcome:
    """Full candidate pipeline: approach, back off, close, score, hold-test.

    Failures become outcome statuses, never exceptions; batch evaluation
    must keep going.
    """
    min_contacts, count_world = (2, False) if mode == "power" else (3, True)
    ap = approach_until_contact(
        scene, hand, approach_pose, flexion, min_contacts, count_world,
        step=step, max_travel=max_travel, count_palm=count_palm,
    )
    if ap.status in (STATUS_NO_CONTACT, STATUS_OBSTACLE):
        return GraspOutcome(ap.status, 0.0, [], None, None, ap.travel)
    axis = approach_pose.axis_z()
    backed = Pose(ap.hand_pose.position - backoff_margin * axis, ap.hand_pose.orientation)
    closed = close_fingers(scene, hand, backed, flexion, d_flexion=d_flexion)
    hand_obj = [c for c in closed.contacts if not c.is_world()]
    if not hand_obj:
        return GraspOutcome(STATUS_NO_CONTACT, 0.0, closed.contacts, backed, closed.flexions, ap.travel)
    ws = wrench_set(
        hand_obj,
        cone_edges=cone_edges,
        torque_scale=scene.torque_scale,
        reference=scene.reference_point,
    )
    eps = epsilon_quality(ws)
    held = hold_test(
        hand_obj,
        scene.physics,
        cone_edges=cone_edges,
        f_max=hand.max_force_per_contact,
        object_reference=scene.reference_point,
    )
    status = OUTCOME_SUCCESS if held else OUTCOME_UNSTABLE
    return GraspOutcome(status, eps, closed.contacts, backed, closed.flexions, ap.travel)
