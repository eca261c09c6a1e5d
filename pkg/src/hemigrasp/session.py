"""Shared-control session: hemisphere-constrained steering and the pick flow.

A session is a single-writer state machine over phases
ObjectSelect -> HemisphereSelect -> Planning -> PickGuidance -> Closing -> Done
(with Retry when planning finds no grasp). Three autonomy profiles share the
machine: `planned` runs the full pipeline, `sc_only` replaces the planner
with a straight-line descent to the hemisphere origin and a user-triggered
close, and `manual` frees the end-effector pose entirely and closes on
confirm. In constrained phases the end-effector pose always satisfies both
hemisphere constraints: on the surface, pointing at the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import IllegalTransition, MissingPlan, WrongPhase
from .geometry.hemisphere import HemisphereSpec, surface_pose, tangent_basis
from .geometry.pose import Pose, quat_from_axis_angle, quat_mul
from .planner import PlanResult

PHASES = ("ObjectSelect", "HemisphereSelect", "Planning", "PickGuidance", "Closing", "Done", "Retry")
PROFILES = ("planned", "sc_only", "manual")
EVENTS = ("confirm", "cancel", "plan_completed", "grasp_closed")


@dataclass(frozen=True)
class UserInput:
    """One 3-DOF device sample plus edge-triggered buttons."""

    dx: float = 0.0
    dy: float = 0.0
    dz: float = 0.0
    toggle_mode: bool = False
    confirm: bool = False
    cancel: bool = False
    dt: float = 0.05

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        for name in ("dx", "dy", "dz"):
            v = getattr(self, name)
            if not -1.0 <= v <= 1.0:
                object.__setattr__(self, name, min(1.0, max(-1.0, float(v))))

    @staticmethod
    def from_dict(d: dict) -> "UserInput":
        return UserInput(
            dx=float(d.get("dx", 0.0)),
            dy=float(d.get("dy", 0.0)),
            dz=float(d.get("dz", 0.0)),
            toggle_mode=bool(d.get("toggle_mode", False)),
            confirm=bool(d.get("confirm", False)),
            cancel=bool(d.get("cancel", False)),
            dt=float(d.get("dt", 0.05)),
        )


@dataclass(frozen=True)
class Gains:
    translate: float = 0.5  # rad/s across the hemisphere at full deflection
    rotate: float = 1.0  # rad/s about the approach axis
    pick_rate: float = 0.25  # progress/s along the guided pick
    manual_linear: float = 0.15  # m/s in manual mode
    manual_angular: float = 0.8  # rad/s in manual mode


@dataclass(frozen=True)
class SessionState:
    hemisphere: HemisphereSpec
    profile: str = "planned"
    phase: str = "ObjectSelect"
    sub_mode: str = "translate"  # translate | rotate (HemisphereSelect)
    direction: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    roll: float = 0.0
    free_pose: Pose | None = None  # manual profile only
    approach_pose: Pose | None = None  # frozen when leaving HemisphereSelect
    plan: PlanResult | None = None
    progress: float = 0.0  # s in [0, 1] during PickGuidance
    selected_object: int = 0
    retry_count: int = 0

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ValueError(f"unknown profile: {self.profile}")
        if self.phase not in PHASES:
            raise ValueError(f"unknown phase: {self.phase}")
        d = np.asarray(self.direction, dtype=float).reshape(3)
        object.__setattr__(self, "direction", d / np.linalg.norm(d))

    # -- derived pose --------------------------------------------------------

    def surface_ee_pose(self) -> Pose:
        return surface_pose(self.hemisphere, self.direction, self.roll)

    def ee_pose(self) -> Pose:
        """Current end-effector pose for snapshots and rendering."""
        if self.profile == "manual":
            return self.free_pose if self.free_pose is not None else self.surface_ee_pose()
        if self.phase in ("ObjectSelect", "HemisphereSelect", "Retry"):
            return self.surface_ee_pose()
        if self.phase == "Planning":
            return self.approach_pose if self.approach_pose else self.surface_ee_pose()
        if self.phase == "PickGuidance":
            return guidance_pose(self)
        # Closing / Done: hold the end of the guided motion
        if self.profile == "planned" and self.plan is not None and self.plan.best is not None:
            return self.plan.best.hand_pose_at_grasp
        if self.approach_pose is not None:
            if self.profile == "sc_only":
                return _sc_only_pose(self, self.progress)
            return self.approach_pose
        return self.surface_ee_pose()


def initial_state(hemisphere: HemisphereSpec, profile: str = "planned") -> SessionState:
    state = SessionState(hemisphere=hemisphere, profile=profile)
    if profile == "manual":
        state = replace(state, free_pose=state.surface_ee_pose())
    return state


def _steer(state: SessionState, inp: UserInput, gains: Gains) -> SessionState:
    """Geodesic steering on the hemisphere; never leaves the surface."""
    if inp.toggle_mode:
        state = replace(
            state, sub_mode="rotate" if state.sub_mode == "translate" else "translate"
        )
    if state.sub_mode == "rotate":
        if inp.dx != 0.0:
            state = replace(state, roll=state.roll + gains.rotate * inp.dx * inp.dt)
        return state
    mag = math.hypot(inp.dx, inp.dy)
    if mag < 1e-12:
        return state
    t1, t2 = tangent_basis(state.direction, state.hemisphere.up_axis)
    v = (inp.dx * t1 + inp.dy * t2) / mag
    angle = gains.translate * mag * inp.dt
    d = math.cos(angle) * state.direction + math.sin(angle) * v
    d = d / np.linalg.norm(d)
    up = state.hemisphere.up_axis
    if float(d @ up) < 0.0:
        # clamp to the base-plane boundary circle, keeping azimuth
        horiz = d - float(d @ up) * up
        n = float(np.linalg.norm(horiz))
        d = horiz / n if n > 1e-12 else state.direction
    return replace(state, direction=d)


def _steer_manual(state: SessionState, inp: UserInput, gains: Gains) -> SessionState:
    """Unconstrained 6-DOF integration for the manual profile."""
    if inp.toggle_mode:
        state = replace(
            state, sub_mode="rotate" if state.sub_mode == "translate" else "translate"
        )
    pose = state.free_pose if state.free_pose is not None else state.surface_ee_pose()
    if state.sub_mode == "translate":
        delta = gains.manual_linear * inp.dt * np.array([inp.dx, inp.dy, inp.dz])
        pose = Pose(pose.position + delta, pose.orientation)
    else:
        q = pose.orientation
        if inp.dx != 0.0:
            q = quat_mul(q, quat_from_axis_angle((0, 0, 1), gains.manual_angular * inp.dx * inp.dt))
        if inp.dy != 0.0:
            q = quat_mul(q, quat_from_axis_angle((0, 1, 0), gains.manual_angular * inp.dy * inp.dt))
        pose = Pose(pose.position, q)
    return replace(state, free_pose=pose)


def apply_input(state: SessionState, inp: UserInput, gains: Gains = Gains()) -> SessionState:
    """Map a device sample to constrained motion; only steering phases accept it."""
    if state.phase == "HemisphereSelect":
        if state.profile == "manual":
            return _steer_manual(state, inp, gains)
        return _steer(state, inp, gains)
    if state.phase == "PickGuidance":
        s = min(1.0, max(0.0, state.progress + gains.pick_rate * inp.dz * inp.dt))
        state = replace(state, progress=s)
        if s >= 1.0:
            state = replace(state, phase="Closing", progress=1.0)
        return state
    raise WrongPhase(f"input not accepted in phase {state.phase}")


def advance_state(
    state: SessionState, event: str, plan_result: PlanResult | None = None
) -> SessionState:
    """Apply a discrete session event; undefined pairs raise IllegalTransition."""
    if event not in EVENTS:
        raise IllegalTransition(f"unknown event: {event}")
    phase, profile = state.phase, state.profile

    if event == "cancel":
        # abandon the attempt from any phase, keep the steering pose
        return replace(
            state, phase="HemisphereSelect", plan=None, approach_pose=None, progress=0.0
        )

    if phase == "ObjectSelect" and event == "confirm":
        return replace(state, phase="HemisphereSelect")

    if phase == "HemisphereSelect" and event == "confirm":
        pose = state.ee_pose()
        if profile == "planned":
            return replace(state, phase="Planning", approach_pose=pose)
        if profile == "sc_only":
            return replace(state, phase="PickGuidance", approach_pose=pose, progress=0.0)
        return replace(state, phase="Closing", approach_pose=pose)  # manual close

    if phase == "Planning" and event == "plan_completed":
        if plan_result is None:
            raise IllegalTransition("plan_completed requires a PlanResult")
        if plan_result.best is not None:
            return replace(state, phase="PickGuidance", plan=plan_result, progress=0.0)
        return replace(state, phase="Retry", plan=plan_result, retry_count=state.retry_count + 1)

    if phase == "Retry" and event == "confirm":
        # user acknowledges and selects another approach; pose preserved
        return replace(state, phase="HemisphereSelect", plan=None, approach_pose=None, progress=0.0)

    if phase == "PickGuidance" and event == "confirm" and profile == "sc_only":
        return replace(state, phase="Closing")  # user-triggered close

    if phase == "Closing" and event == "grasp_closed":
        return replace(state, phase="Done")

    raise IllegalTransition(f"event {event} not defined in phase {phase} ({profile})")


def _sc_only_pose(state: SessionState, s: float) -> Pose:
    start = state.approach_pose
    return Pose(
        start.position + s * (state.hemisphere.center - start.position), start.orientation
    )


def guidance_pose(state: SessionState, mode: str | None = None) -> Pose:
    """Pose along the guided pick at the current progress.

    planned: interpolate from the confirmed approach pose to the planner's
    backed-off grasp pose (linear position, shortest-arc slerp).
    sc_only: straight segment from the approach pose to the hemisphere origin
    with fixed orientation.
    """
    if mode is None:
        mode = "sc_only" if state.profile == "sc_only" else "planned"
    if state.approach_pose is None:
        raise MissingPlan("no confirmed approach pose")
    if mode == "sc_only":
        return _sc_only_pose(state, state.progress)
    if state.plan is None or state.plan.best is None:
        raise MissingPlan("no plan result with a best grasp")
    return state.approach_pose.interpolate(
        state.plan.best.hand_pose_at_grasp, state.progress
    )
