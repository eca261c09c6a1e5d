"""Headless benchmark harness: randomized trials, CSV reports, scripted sessions.

Object poses are randomized within an A4-sized region (0.297 m x 0.210 m)
with random yaw, seeded per (seed, object, trial) so runs are reproducible
and order-independent. The result CSV is fully deterministic; wall-clock
timings go to a separate sidecar so the main report is bit-reproducible.
"""

from __future__ import annotations

import csv
import io
import math
import time
import uuid
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..geometry.hemisphere import hemisphere_for, surface_pose
from ..geometry.mesh import TriMesh, load_mesh
from ..geometry.perturb import perturb_mesh
from ..geometry.pose import Pose
from ..geometry.shape_metrics import chamfer_l1, volumetric_iou
from ..hand import HandModel, builtin_hand
from ..planner import SamplingSpec, plan, select_mode
from ..session import Gains, UserInput, advance_state, apply_input, initial_state
from ..sim.grasp import OUTCOME_SUCCESS, close_fingers, simulate_grasp
from ..sim.hold import hold_test
from ..sim.scene import ConditionedObject, PhysicsParams, Scene, resting_pose
from .records import TrialLog, TrialRecord

A4_X = 0.297
A4_Y = 0.210


def _trial_rng(seed: int, object_index: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, object_index, trial])


def random_object_pose(mesh: TriMesh, rng: np.random.Generator, support_height: float) -> Pose:
    x = rng.uniform(-A4_X / 2.0, A4_X / 2.0)
    y = rng.uniform(-A4_Y / 2.0, A4_Y / 2.0)
    yaw = rng.uniform(0.0, 2.0 * math.pi)
    return resting_pose(mesh, x, y, yaw, support_height)


def execute_grasp(
    exec_scene: Scene, hand: HandModel, grasp_pose: Pose, flexion: float, cone_edges: int = 8
) -> tuple[bool, list]:
    """Close at the planned grasp pose against the execution geometry and hold-test."""
    closed = close_fingers(exec_scene, hand, grasp_pose, flexion)
    hand_obj = [c for c in closed.contacts if not c.is_world()]
    if not hand_obj:
        return False, closed.contacts
    held = hold_test(
        hand_obj,
        exec_scene.physics,
        cone_edges=cone_edges,
        f_max=hand.max_force_per_contact,
        object_reference=exec_scene.reference_point,
    )
    return held, closed.contacts


@dataclass
class _TrialResult:
    record: TrialRecord
    eps_successes: list[float]


def _run_trial(
    object_name: str,
    object_index: int,
    cond_plan: ConditionedObject,
    cond_exec: ConditionedObject,
    hand: HandModel,
    policy,
    policy_name: str,
    profile: str,
    trial: int,
    seed: int,
    spec: SamplingSpec,
    workers: int,
    physics: PhysicsParams,
    log_candidates: bool,
) -> _TrialResult:
    rng = _trial_rng(seed, object_index, trial)
    pose = random_object_pose(cond_exec.mesh, rng, 0.0)
    exec_scene = cond_exec.placed(pose, physics, 0.0, name=object_name)
    plan_scene = cond_plan.placed(pose, physics, 0.0, name=object_name)

    t0 = time.perf_counter()
    mode = select_mode(plan_scene.object_height())
    hemi = hemisphere_for(plan_scene.object_mesh, Pose.identity(), 0.0, mode)
    direction = policy(hemi, rng)
    user_pose = surface_pose(hemi, direction, 0.0)
    select_time = time.perf_counter() - t0

    trial_id = f"{object_name}-{trial}"
    if profile == "planned":
        t0 = time.perf_counter()
        result = plan(plan_scene, hand, user_pose, hemi, spec, worker_count=workers)
        plan_time = time.perf_counter() - t0
        t0 = time.perf_counter()
        if result.best is None:
            outcome, reason = "Failure", "no_grasp"
        else:
            held, _ = execute_grasp(
                exec_scene, hand, result.best.hand_pose_at_grasp, result.best.flexion
            )
            outcome = "Success" if held else "Failure"
            reason = "" if held else "hold_failed"
        pick_time = time.perf_counter() - t0
        record = TrialRecord(
            trial_id=trial_id,
            object_id=object_name,
            object_pose=pose.to_dict(),
            mode=mode,
            profile=profile,
            policy=policy_name,
            candidate_count=len(result.candidates),
            simulated_count=result.simulated_count(),
            success_count=result.success_count(),
            filtered_count=len(result.candidates) - result.simulated_count(),
            best_epsilon=result.best.epsilon if result.best else 0.0,
            best_flexion=result.best.flexion if result.best else None,
            outcome=outcome,
            reason=reason,
            select_time_s=select_time,
            plan_time_s=plan_time,
            pick_time_s=pick_time,
            candidates=[c.to_dict(with_contacts=log_candidates) for c in result.candidates],
        )
        eps = [c.epsilon for c in result.candidates if c.status == OUTCOME_SUCCESS]
        return _TrialResult(record, eps)

    # sc_only / manual stand-ins: descend along the approach axis to first
    # contact, then close where the scripted user would
    t0 = time.perf_counter()
    out = simulate_grasp(plan_scene, hand, user_pose, 0.0, hemi.mode)
    plan_time = 0.0
    held = False
    if out.hand_pose_at_grasp is not None:
        held, _ = execute_grasp(exec_scene, hand, out.hand_pose_at_grasp, 0.0)
    pick_time = time.perf_counter() - t0
    record = TrialRecord(
        trial_id=trial_id,
        object_id=object_name,
        object_pose=pose.to_dict(),
        mode=mode,
        profile=profile,
        policy=policy_name,
        candidate_count=1,
        simulated_count=1,
        success_count=1 if out.status == OUTCOME_SUCCESS else 0,
        best_epsilon=out.epsilon,
        best_flexion=0.0,
        outcome="Success" if held else "Failure",
        reason="" if held else "hold_failed",
        select_time_s=select_time,
        plan_time_s=plan_time,
        pick_time_s=pick_time,
    )
    return _TrialResult(record, [out.epsilon] if out.status == OUTCOME_SUCCESS else [])


def _write_csv(path: Path, header: list[str], rows: list[list]):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue())


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def bench_run(
    objects: list[tuple[str, TriMesh]] | str | Path,
    trials_per_object: int,
    policy="top_down",
    profile: str = "planned",
    seed: int = 0,
    out: str | Path = "bench_report.csv",
    hand: HandModel | str = "three_finger",
    spec: SamplingSpec = SamplingSpec(),
    workers: int = 1,
    physics: PhysicsParams = PhysicsParams(),
    log_candidates: bool = True,
) -> dict:
    """Randomized grasping trials over an object set; writes report + logs.

    Outputs: `<out>` (deterministic result CSV), `<out>.timings.csv`
    (wall-clock sidecar), `<out>.trials.jsonl` (full per-trial records).
    """
    from .policies import resolve_policy

    if isinstance(objects, (str, Path)):
        objects = load_object_dir(objects)
    if not objects:
        raise ValueError("no objects to benchmark")
    if trials_per_object < 1:
        raise ValueError("trials_per_object must be >= 1")
    if isinstance(policy, str):
        policy_name, policy = policy, resolve_policy(policy)
    else:
        policy_name = getattr(policy, "name", getattr(policy, "__name__", "custom"))
    if isinstance(hand, str):
        hand = builtin_hand(hand)

    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    log = TrialLog(out.with_suffix(out.suffix + ".trials.jsonl"))
    log.path.unlink(missing_ok=True)

    rows = []
    timing_rows = []
    total_trials = total_success = 0
    total_cand = total_cand_success = 0
    for oi, (name, mesh) in enumerate(objects):
        cond = ConditionedObject.prepare(mesh)
        eps_all: list[float] = []
        succ = 0
        cand_succ = cand_sim = 0
        for t in range(trials_per_object):
            tr = _run_trial(
                name, oi, cond, cond, hand, policy, policy_name, profile,
                t, seed, spec, workers, physics, log_candidates,
            )
            log.append(tr.record)
            eps_all.extend(tr.eps_successes)
            succ += 1 if tr.record.outcome == "Success" else 0
            cand_succ += tr.record.success_count
            cand_sim += tr.record.simulated_count
            timing_rows.append(
                [name, t, _fmt(tr.record.select_time_s), _fmt(tr.record.plan_time_s), _fmt(tr.record.pick_time_s)]
            )
        eps_mean = float(np.mean(eps_all)) if eps_all else 0.0
        eps_std = float(np.std(eps_all)) if eps_all else 0.0
        rows.append(
            [
                name,
                trials_per_object,
                _fmt(cand_succ / cand_sim if cand_sim else 0.0),
                _fmt(succ / trials_per_object),
                _fmt(eps_mean),
                _fmt(eps_std),
            ]
        )
        total_trials += trials_per_object
        total_success += succ
        total_cand += cand_sim
        total_cand_success += cand_succ
    rows.append(
        [
            "OVERALL",
            total_trials,
            _fmt(total_cand_success / total_cand if total_cand else 0.0),
            _fmt(total_success / total_trials),
            "",
            "",
        ]
    )
    header = [
        "object",
        "trials",
        "planner_success_rate",
        "trial_success_rate",
        "eps_mean",
        "eps_std",
    ]
    _write_csv(out, header, rows)
    _write_csv(
        out.with_suffix(out.suffix + ".timings.csv"),
        ["object", "trial", "policy_time_s", "plan_time_s", "pick_time_s"],
        timing_rows,
    )
    return {
        "report": str(out),
        "trials": total_trials,
        "trial_success_rate": total_success / total_trials,
        "planner_success_rate": total_cand_success / total_cand if total_cand else 0.0,
    }


def bench_perturb(
    object_mesh: TriMesh | str | Path,
    sigmas: list[float],
    trials: int,
    seed: int = 0,
    out: str | Path = "perturb_report.csv",
    hand: HandModel | str = "three_finger",
    policy="top_down",
    spec: SamplingSpec = SamplingSpec(),
    workers: int = 1,
    physics: PhysicsParams = PhysicsParams(),
) -> dict:
    """Reconstruction-error study: plan on the perturbed mesh, execute on truth.

    For each sigma the object mesh is perturbed, the planner only ever sees
    the perturbed geometry, and the hold test runs against the original.
    Rows report volumetric IoU and Chamfer of perturbed vs original.
    """
    from .policies import resolve_policy

    if isinstance(object_mesh, (str, Path)):
        object_mesh = load_mesh(object_mesh)
    if isinstance(policy, str):
        policy_name, policy = policy, resolve_policy(policy)
    else:
        policy_name = getattr(policy, "name", getattr(policy, "__name__", "custom"))
    if isinstance(hand, str):
        hand = builtin_hand(hand)
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    log = TrialLog(out.with_suffix(out.suffix + ".trials.jsonl"))
    log.path.unlink(missing_ok=True)

    cond_exec = ConditionedObject.prepare(object_mesh)
    rows = []
    summary = []
    for si, sigma in enumerate(sigmas):
        perturbed = perturb_mesh(object_mesh, sigma, seed=seed + 7919 * si)
        iou = volumetric_iou(object_mesh, perturbed)
        cd = chamfer_l1(object_mesh, perturbed, seed=seed)
        cond_plan = ConditionedObject.prepare(perturbed) if sigma > 0 else cond_exec
        succ = 0
        cand_succ = cand_sim = 0
        for t in range(trials):
            tr = _run_trial(
                f"sigma{sigma}", si, cond_plan, cond_exec, hand, policy, policy_name,
                "planned", t, seed, spec, workers, physics, log_candidates=False,
            )
            log.append(tr.record)
            succ += 1 if tr.record.outcome == "Success" else 0
            cand_succ += tr.record.success_count
            cand_sim += tr.record.simulated_count
        rows.append(
            [
                _fmt(sigma),
                _fmt(iou),
                _fmt(cd),
                _fmt(cd * 10.0),
                trials,
                succ,
                _fmt(succ / trials),
                _fmt(cand_succ / cand_sim if cand_sim else 0.0),
            ]
        )
        summary.append({"sigma": sigma, "iou": iou, "chamfer_m": cd, "success_rate": succ / trials})
    _write_csv(
        out,
        [
            "sigma_m",
            "volumetric_iou",
            "chamfer_m",
            "chamfer_x10",
            "trials",
            "successes",
            "trial_success_rate",
            "planner_success_rate",
        ],
        rows,
    )
    return {"report": str(out), "rows": summary}


def load_object_dir(path: str | Path) -> list[tuple[str, TriMesh]]:
    """All OBJ/STL meshes in a directory, sorted by name."""
    path = Path(path)
    out = []
    for p in sorted(path.iterdir()):
        if p.suffix.lower() in (".obj", ".stl"):
            try:
                out.append((p.stem, load_mesh(p)))
            except Exception as exc:  # unreadable mesh: skip with warning
                print(f"warning: skipping unreadable mesh {p}: {exc}")
    if not out:
        raise ValueError(f"no readable meshes in {path}")
    return out


def run_scripted_session(
    profile: str,
    scene: Scene,
    hand: HandModel,
    spec: SamplingSpec = SamplingSpec(),
    workers: int = 1,
    gains: Gains = Gains(),
    max_steps: int = 5000,
) -> tuple[str, TrialRecord]:
    """Drive a full session headlessly to Done; returns (final phase, record).

    The scripted user confirms the object, steers briefly, confirms the
    approach, rides the guidance (or closes manually), and finishes the pick.
    """
    mode = select_mode(scene.object_height())
    hemi = hemisphere_for(scene.object_mesh, Pose.identity(), 0.0, mode)
    state = initial_state(hemi, profile)
    t_start = time.perf_counter()
    state = advance_state(state, "confirm")  # object selected

    # steer briefly so the scripted run exercises the constraint, then back
    for _ in range(10):
        state = apply_input(state, UserInput(dx=0.5, dy=0.2, dt=0.05), gains)
    for _ in range(10):
        state = apply_input(state, UserInput(dx=-0.5, dy=-0.2, dt=0.05), gains)
    tip_reach = 0.10  # how far fingertips lead the wrist, roughly
    if profile == "manual":
        # descend until the fingertips straddle the object
        for _ in range(max_steps):
            pose = state.ee_pose()
            if pose.position[2] <= scene.object_height() + tip_reach - 0.03:
                break
            state = apply_input(state, UserInput(dz=-1.0, dt=0.05), gains)
    select_time = time.perf_counter() - t_start

    state = advance_state(state, "confirm")
    plan_time = 0.0
    result = None
    if state.phase == "Planning":
        t0 = time.perf_counter()
        result = plan(scene, hand, state.approach_pose, hemi, spec, worker_count=workers)
        plan_time = time.perf_counter() - t0
        state = advance_state(state, "plan_completed", result)
        if state.phase == "Retry":
            state = advance_state(state, "confirm")
            record = TrialRecord(
                trial_id=str(uuid.uuid4()),
                object_id=scene.name,
                object_pose=scene.object_pose.to_dict(),
                mode=mode,
                profile=profile,
                policy="scripted_session",
                candidate_count=len(result.candidates),
                simulated_count=result.simulated_count(),
                success_count=result.success_count(),
                outcome="Failure",
                reason="no_grasp",
                select_time_s=select_time,
                plan_time_s=plan_time,
            )
            return state.phase, record

    t0 = time.perf_counter()
    if state.phase == "PickGuidance":
        steps = 0
        while state.phase == "PickGuidance" and steps < max_steps:
            state = apply_input(state, UserInput(dz=1.0, dt=0.05), gains)
            steps += 1
            if profile == "sc_only":
                # user closes once the fingertips straddle the object
                pose = state.ee_pose()
                if (
                    pose.position[2] <= scene.object_height() + tip_reach - 0.03
                    or state.progress >= 0.9
                ):
                    state = advance_state(state, "confirm")
                    break
    if state.phase != "Closing":
        raise RuntimeError(f"scripted session stuck in {state.phase}")
    close_pose = state.ee_pose()
    flexion = (
        result.best.flexion if result is not None and result.best is not None else 0.0
    )
    held, _ = execute_grasp(scene, hand, close_pose, flexion)
    state = advance_state(state, "grasp_closed")
    pick_time = time.perf_counter() - t0

    record = TrialRecord(
        trial_id=str(uuid.uuid4()),
        object_id=scene.name,
        object_pose=scene.object_pose.to_dict(),
        mode=mode,
        profile=profile,
        policy="scripted_session",
        candidate_count=len(result.candidates) if result else 1,
        simulated_count=result.simulated_count() if result else 1,
        success_count=result.success_count() if result else (1 if held else 0),
        best_epsilon=result.best.epsilon if result and result.best else 0.0,
        best_flexion=flexion,
        outcome="Success" if held else "Failure",
        reason="" if held else "hold_failed",
        select_time_s=select_time,
        plan_time_s=plan_time,
        pick_time_s=pick_time,
    )
    return state.phase, record
