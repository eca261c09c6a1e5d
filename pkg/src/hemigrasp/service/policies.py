"""Scripted user stand-ins for headless benchmarking."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from ..geometry.hemisphere import HemisphereSpec
from ..session import Gains, SessionState, UserInput, apply_input

MIN_ELEVATION_DEG = 30.0  # random_upper stays this far above the base plane


def top_down(hemi: HemisphereSpec, rng: np.random.Generator) -> np.ndarray:
    """Pole approach."""
    return hemi.up_axis.copy()


def random_upper(hemi: HemisphereSpec, rng: np.random.Generator) -> np.ndarray:
    """Uniform direction over the cap at least 30 degrees above the base."""
    z_min = math.sin(math.radians(MIN_ELEVATION_DEG))
    z = rng.uniform(z_min, 1.0)
    phi = rng.uniform(0.0, 2.0 * math.pi)
    r = math.sqrt(max(0.0, 1.0 - z * z))
    local = np.array([r * math.cos(phi), r * math.sin(phi), z])
    if np.allclose(hemi.up_axis, [0, 0, 1]):
        return local
    # align the cap with an arbitrary up axis
    from ..geometry.hemisphere import tangent_basis

    t1, t2 = tangent_basis(hemi.up_axis)
    return local[0] * t1 + local[1] * t2 + local[2] * hemi.up_axis


def replay_inputs(hemi: HemisphereSpec, stream: list[dict], gains: Gains = Gains()) -> np.ndarray:
    """Drive the steering machine with a recorded input stream; return the direction."""
    state = SessionState(hemisphere=hemi, profile="planned", phase="HemisphereSelect")
    for d in stream:
        state = apply_input(state, UserInput.from_dict(d), gains)
    return state.direction


class ScriptedPolicy:
    """Replays a JSONL input stream recorded from a live session."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.stream = [
            json.loads(line)
            for line in self.path.read_text().splitlines()
            if line.strip()
        ]
        self.name = f"scripted:{self.path.name}"

    def __call__(self, hemi: HemisphereSpec, rng: np.random.Generator) -> np.ndarray:
        return replay_inputs(hemi, self.stream)


def resolve_policy(name: str):
    """Policy from a CLI spec: top_down | random_upper | scripted:<file>."""
    if name == "top_down":
        return top_down
    if name == "random_upper":
        return random_upper
    if name.startswith("scripted:"):
        return ScriptedPolicy(name.split(":", 1)[1])
    raise ValueError(f"unknown policy: {name}")
