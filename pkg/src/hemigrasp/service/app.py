"""Wire service: scene/session management over REST plus a websocket stream.

Protocol (JSON everywhere, documented in the repo README):

  REST
    GET  /health                      liveness
    GET  /hands                       built-in hand names
    GET  /hands/{name}                full hand config
    POST /scenes                      upload a scene (inline OBJ text or primitive)
    GET  /scenes                      scene summaries
    GET  /scenes/{id}                 scene + render mesh
    POST /sessions                    create a session -> first snapshot
    GET  /sessions/{id}/snapshot      latest snapshot
    POST /sessions/{id}/event        {"event": confirm|cancel|grasp_closed}

  WS /sessions/{id}/stream           client frames:
    {"type":"input", dx,dy,dz,toggle_mode,confirm,cancel,dt}
    {"type":"plan"} {"type":"execute"} {"type":"snapshot"}
  server frames: {"type":"snapshot", ...} | {"type":"error", code, detail}

Every client frame is acknowledged with a snapshot (or an error frame);
planning runs aside in an executor so input acks keep flowing mid-plan.
Snapshots carry a monotonic version and no wall-clock content, so scripted
sessions produce bit-identical transcripts.
"""

from __future__ import annotations

import asyncio
import io
import itertools
import json
import threading
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from pydantic import BaseModel, Field

from ..errors import HemigraspError, IllegalTransition, WrongPhase
from ..geometry.hemisphere import hemisphere_for
from ..geometry.mesh import TriMesh
from ..geometry.pose import Pose
from ..geometry.primitives import box, cylinder, icosphere
from ..hand import HandModel, builtin_hand, builtin_hand_names
from ..planner import PlanResult, SamplingSpec, plan, select_mode
from ..session import Gains, SessionState, UserInput, advance_state, apply_input, initial_state
from ..sim.scene import ConditionedObject, PhysicsParams, Scene
from .bench import execute_grasp
from .records import TrialLog, TrialRecord


class SceneUpload(BaseModel):
    name: str = "scene"
    mesh_obj: Optional[str] = None  # OBJ file text
    primitive: Optional[dict] = None  # {"kind": box|cylinder|sphere, dims...}
    pose: Optional[dict] = None
    physics: Optional[dict] = None
    support_height: float = 0.0
    decimate_to: int = 1000
    concavity_tol: float = 0.05


class SessionCreate(BaseModel):
    scene_id: str
    hand: str = "three_finger"
    profile: str = "planned"
    mode: str = "auto"  # auto | power | precision
    sampling: Optional[dict] = None
    worker_count: int = Field(default=1, ge=1)


class EventRequest(BaseModel):
    event: str


def _primitive_mesh(spec: dict) -> TriMesh:
    kind = spec.get("kind", "box")
    if kind == "box":
        return box(tuple(spec.get("size", (0.06, 0.06, 0.06))))
    if kind == "cylinder":
        return cylinder(float(spec.get("radius", 0.034)), float(spec.get("height", 0.10)))
    if kind == "sphere":
        return icosphere(float(spec.get("radius", 0.04)), 3)
    raise ValueError(f"unknown primitive kind: {kind}")


@dataclass
class SceneEntry:
    scene_id: str
    scene: Scene


@dataclass
class SessionRuntime:
    session_id: str
    scene_id: str
    scene: Scene
    hand_name: str
    hand: HandModel
    spec: SamplingSpec
    worker_count: int
    state: SessionState
    version: int = 0
    outcome: Optional[dict] = None
    planning: bool = False
    recorded: bool = False
    gains: Gains = field(default_factory=Gains)

    def snapshot(self) -> dict:
        self.version += 1
        st = self.state
        pose = st.ee_pose()
        plan_block = None
        if st.plan is not None:
            plan_block = {
                "candidate_count": len(st.plan.candidates),
                "best_index": st.plan.best_index,
                "candidates": [
                    {
                        "position": (
                            c.approach_pose.position.tolist() if c.approach_pose else None
                        ),
                        "angular_offset": c.angular_offset,
                        "azimuth_index": c.azimuth_index,
                        "flexion": c.flexion,
                        "status": c.status,
                        "epsilon": c.epsilon,
                    }
                    for c in st.plan.candidates
                ],
            }
        best = st.plan.best if st.plan is not None else None
        flexion = 0.0
        if best is not None:
            flexion = best.flexion
        return {
            "type": "snapshot",
            "version": self.version,
            "session_id": self.session_id,
            "scene_id": self.scene_id,
            "hand": self.hand_name,
            "profile": st.profile,
            "phase": st.phase,
            "sub_mode": st.sub_mode,
            "progress": st.progress,
            "retry_count": st.retry_count,
            "ee_pose": pose.to_dict(),
            "flexion": flexion,
            "hemisphere": st.hemisphere.to_dict(),
            "plan": plan_block,
            "outcome": self.outcome,
        }


def _error(code: str, detail: str) -> dict:
    return {"type": "error", "code": code, "detail": detail}


def create_app(log_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="hemigrasp service")
    scenes: dict[str, SceneEntry] = {}
    sessions: dict[str, SessionRuntime] = {}
    log = TrialLog(Path(log_dir or ".") / "trials.jsonl") if log_dir else None
    counter = itertools.count(1)

    def _get_scene(scene_id: str) -> SceneEntry:
        if scene_id not in scenes:
            raise HTTPException(404, f"unknown scene {scene_id}")
        return scenes[scene_id]

    def _get_session(session_id: str) -> SessionRuntime:
        if session_id not in sessions:
            raise HTTPException(404, f"unknown session {session_id}")
        return sessions[session_id]

    def _run_plan(rt: SessionRuntime) -> PlanResult:
        return plan(
            rt.scene,
            rt.hand,
            rt.state.approach_pose,
            rt.state.hemisphere,
            rt.spec,
            worker_count=rt.worker_count,
        )

    def _run_close(rt: SessionRuntime):
        pose = rt.state.ee_pose()
        best = rt.state.plan.best if rt.state.plan is not None else None
        flexion = best.flexion if best is not None else 0.0
        held, contacts = execute_grasp(rt.scene, rt.hand, pose, flexion)
        rt.outcome = {
            "held": bool(held),
            "contacts": len([c for c in contacts if not c.is_world()]),
        }

    def _record_trial(rt: SessionRuntime):
        if log is None or rt.recorded:
            return
        rt.recorded = True
        st = rt.state
        result = st.plan
        log.append(
            TrialRecord(
                trial_id=rt.session_id,
                object_id=rt.scene_id,
                object_pose=rt.scene.object_pose.to_dict(),
                mode=st.hemisphere.mode,
                profile=st.profile,
                policy=f"session:{rt.session_id}",
                candidate_count=len(result.candidates) if result else 0,
                simulated_count=result.simulated_count() if result else 0,
                success_count=result.success_count() if result else 0,
                best_epsilon=result.best.epsilon if result and result.best else 0.0,
                best_flexion=result.best.flexion if result and result.best else None,
                outcome="Success" if rt.outcome and rt.outcome.get("held") else "Failure",
                reason="" if rt.outcome and rt.outcome.get("held") else "hold_failed",
            )
        )

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/hands")
    def hands():
        return {"hands": builtin_hand_names()}

    @app.get("/hands/{name}")
    def hand_config(name: str):
        try:
            return builtin_hand(name).to_config()
        except HemigraspError as exc:
            raise HTTPException(404, str(exc))

    @app.post("/scenes")
    def upload_scene(upload: SceneUpload):
        try:
            if upload.mesh_obj is not None:
                from ..geometry.mesh import load_obj

                tmp = io.StringIO(upload.mesh_obj)
                verts, faces = [], []
                for line in tmp:
                    parts = line.split()
                    if not parts:
                        continue
                    if parts[0] == "v":
                        verts.append([float(x) for x in parts[1:4]])
                    elif parts[0] == "f":
                        idx = [int(tok.split("/")[0]) - 1 for tok in parts[1:]]
                        for k in range(1, len(idx) - 1):
                            faces.append([idx[0], idx[k], idx[k + 1]])
                mesh = TriMesh(np.array(verts), np.array(faces))
            elif upload.primitive is not None:
                mesh = _primitive_mesh(upload.primitive)
            else:
                raise HTTPException(422, "provide mesh_obj or primitive")
            pose = Pose.from_dict(upload.pose) if upload.pose else Pose.identity()
            physics = (
                PhysicsParams.from_dict(upload.physics) if upload.physics else PhysicsParams()
            )
            cond = ConditionedObject.prepare(mesh, upload.decimate_to, upload.concavity_tol)
            scene = cond.placed(pose, physics, upload.support_height, name=upload.name)
        except HemigraspError as exc:
            raise HTTPException(422, f"scene rejected: {exc}")
        scene_id = f"scene-{next(counter)}"
        scenes[scene_id] = SceneEntry(scene_id, scene)
        return {"scene_id": scene_id, "name": upload.name, "parts": len(scene.parts)}

    @app.get("/scenes")
    def list_scenes():
        return {
            "scenes": [
                {
                    "scene_id": e.scene_id,
                    "name": e.scene.name,
                    "faces": len(e.scene.object_mesh.faces),
                    "parts": len(e.scene.parts),
                    "support_height": e.scene.support_height,
                }
                for e in scenes.values()
            ]
        }

    @app.get("/scenes/{scene_id}")
    def fetch_scene(scene_id: str):
        e = _get_scene(scene_id)
        return {
            "scene_id": e.scene_id,
            "name": e.scene.name,
            "support_height": e.scene.support_height,
            "object_pose": e.scene.object_pose.to_dict(),
            "mesh": {
                "vertices": e.scene.object_mesh.vertices.tolist(),
                "faces": e.scene.object_mesh.faces.tolist(),
            },
        }

    @app.post("/sessions")
    def create_session(req: SessionCreate):
        entry = _get_scene(req.scene_id)
        try:
            hand = builtin_hand(req.hand)
        except HemigraspError as exc:
            raise HTTPException(422, str(exc))
        mode = req.mode
        if mode == "auto":
            mode = select_mode(entry.scene.object_height())
        if mode not in ("power", "precision"):
            raise HTTPException(422, f"unknown mode {req.mode}")
        hemi = hemisphere_for(
            entry.scene.object_mesh, Pose.identity(), entry.scene.support_height, mode
        )
        spec = SamplingSpec.from_dict(req.sampling) if req.sampling else SamplingSpec()
        if req.profile not in ("planned", "sc_only", "manual"):
            raise HTTPException(422, f"unknown profile {req.profile}")
        session_id = f"session-{next(counter)}"
        rt = SessionRuntime(
            session_id=session_id,
            scene_id=req.scene_id,
            scene=entry.scene,
            hand_name=req.hand,
            hand=hand,
            spec=spec,
            worker_count=req.worker_count,
            state=initial_state(hemi, req.profile),
        )
        sessions[session_id] = rt
        return rt.snapshot()

    @app.get("/sessions/{session_id}/snapshot")
    def get_snapshot(session_id: str):
        return _get_session(session_id).snapshot()

    @app.post("/sessions/{session_id}/event")
    async def post_event(session_id: str, req: EventRequest):
        rt = _get_session(session_id)
        try:
            rt.state = advance_state(rt.state, req.event)
        except (IllegalTransition, WrongPhase) as exc:
            raise HTTPException(409, str(exc))
        if rt.state.phase == "Planning":
            loop = asyncio.get_running_loop()
            result = await loop.run_in_executor(None, _run_plan, rt)
            rt.state = advance_state(rt.state, "plan_completed", result)
        if rt.state.phase == "Closing":
            loop = asyncio.get_running_loop()
            await loop.run_in_executor(None, _run_close, rt)
            rt.state = advance_state(rt.state, "grasp_closed")
            _record_trial(rt)
        return rt.snapshot()

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(ws: WebSocket, session_id: str):
        await ws.accept()
        rt = sessions.get(session_id)
        if rt is None:
            await ws.send_json(_error("UnknownSession", session_id))
            await ws.close()
            return
        loop = asyncio.get_running_loop()
        plan_task: asyncio.Task | None = None

        async def finish_plan(task_rt: SessionRuntime):
            result = await loop.run_in_executor(None, _run_plan, task_rt)
            task_rt.state = advance_state(task_rt.state, "plan_completed", result)
            task_rt.planning = False
            await ws.send_json(task_rt.snapshot())

        async def run_close():
            await loop.run_in_executor(None, _run_close, rt)
            rt.state = advance_state(rt.state, "grasp_closed")
            _record_trial(rt)

        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError as exc:
                    await ws.send_json(_error("MalformedMessage", str(exc)))
                    continue
                mtype = msg.get("type")
                if mtype == "snapshot":
                    await ws.send_json(rt.snapshot())
                elif mtype == "input":
                    try:
                        inp = UserInput.from_dict(msg)
                    except (TypeError, ValueError) as exc:
                        await ws.send_json(_error("MalformedMessage", str(exc)))
                        continue
                    try:
                        if inp.cancel:
                            rt.state = advance_state(rt.state, "cancel")
                            rt.outcome = None
                        elif inp.confirm:
                            rt.state = advance_state(rt.state, "confirm")
                            if rt.state.phase == "Planning" and not rt.planning:
                                rt.planning = True
                                plan_task = asyncio.ensure_future(finish_plan(rt))
                            elif rt.state.phase == "Closing":
                                await run_close()
                        elif rt.state.phase in ("HemisphereSelect", "PickGuidance"):
                            prev_phase = rt.state.phase
                            rt.state = apply_input(rt.state, inp, rt.gains)
                            if prev_phase == "PickGuidance" and rt.state.phase == "Closing":
                                await run_close()
                        # inputs in other phases are no-ops (still acknowledged)
                    except (IllegalTransition, WrongPhase) as exc:
                        await ws.send_json(_error(type(exc).__name__, str(exc)))
                        continue
                    await ws.send_json(rt.snapshot())
                elif mtype == "plan":
                    if rt.state.phase != "Planning":
                        await ws.send_json(
                            _error("IllegalTransition", f"plan not valid in {rt.state.phase}")
                        )
                        continue
                    if not rt.planning:
                        rt.planning = True
                        plan_task = asyncio.ensure_future(finish_plan(rt))
                    await ws.send_json(rt.snapshot())
                elif mtype == "execute":
                    if rt.state.phase != "Closing":
                        await ws.send_json(
                            _error("IllegalTransition", f"execute not valid in {rt.state.phase}")
                        )
                        continue
                    await run_close()
                    await ws.send_json(rt.snapshot())
                else:
                    await ws.send_json(_error("MalformedMessage", f"unknown type {mtype!r}"))
        except WebSocketDisconnect:
            pass
        finally:
            if plan_task is not None and not plan_task.done():
                plan_task.cancel()

    return app
