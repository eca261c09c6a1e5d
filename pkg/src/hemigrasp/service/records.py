"""Trial persistence: append-only JSONL records, one trial per line."""

from __future__ import annotations

import json
import threading
from dataclasses import asdict, dataclass, field
from pathlib import Path


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one grasping trial (bench or live session)."""

    trial_id: str
    object_id: str
    object_pose: dict
    mode: str  # hemisphere mode: power | precision
    profile: str  # planned | sc_only | manual
    policy: str  # policy name or live session id
    candidate_count: int = 0
    simulated_count: int = 0
    success_count: int = 0
    filtered_count: int = 0
    best_epsilon: float = 0.0
    best_flexion: float | None = None
    outcome: str = "Failure"  # Success | Failure
    reason: str = ""
    select_time_s: float = 0.0  # "policy time" for scripted users
    plan_time_s: float = 0.0
    pick_time_s: float = 0.0
    candidates: list = field(default_factory=list)  # serialized GraspCandidates

    def __post_init__(self):
        for name in ("select_time_s", "plan_time_s", "pick_time_s"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @staticmethod
    def from_json(text: str) -> "TrialRecord":
        return TrialRecord(**json.loads(text))


class TrialLog:
    """Append-serialized JSONL store."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def append(self, record: TrialRecord):
        line = record.to_json()
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    def read_all(self) -> list[TrialRecord]:
        if not self.path.exists():
            return []
        out = []
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    out.append(TrialRecord.from_json(line))
        return out
