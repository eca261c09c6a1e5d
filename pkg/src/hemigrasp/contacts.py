"""Contact points shared between the contact simulator and the quality metric."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ContactPoint:
    """World-frame contact: position on the touched surface, normal into the hand."""

    position: np.ndarray
    normal: np.ndarray
    mu: float
    source: str  # "palm", "finger<i>", or "world"
    separation: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        n = np.asarray(self.normal, dtype=float).reshape(3)
        ln = float(np.linalg.norm(n))
        if abs(ln - 1.0) > 1e-9:
            if ln <= 0:
                raise ValueError("zero contact normal")
            n = n / ln
        object.__setattr__(self, "normal", n)

    def is_world(self) -> bool:
        return self.source == "world"

    def to_dict(self) -> dict:
        return {
            "position": self.position.tolist(),
            "normal": self.normal.tolist(),
            "mu": self.mu,
            "source": self.source,
            "separation": self.separation,
        }

    @staticmethod
    def from_dict(d: dict) -> "ContactPoint":
        return ContactPoint(
            np.array(d["position"], dtype=float),
            np.array(d["normal"], dtype=float),
            float(d["mu"]),
            str(d["source"]),
            float(d.get("separation", 0.0)),
        )
