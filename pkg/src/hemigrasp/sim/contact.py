"""Contact gathering over hand capsules."""

from __future__ import annotations

import numpy as np

from ..contacts import ContactPoint
from ..geometry.convex import ConvexPart
from ..hand import WorldCapsule
from .collision import (
    capsule_part_lower_bound,
    capsule_part_separation,
    capsule_plane_separation,
)
from .scene import PhysicsParams

CONTACT_TOL = 0.0005  # 0.5 mm


def object_contacts(
    capsules: list[WorldCapsule],
    parts: tuple[ConvexPart, ...],
    params: PhysicsParams,
    tol: float = CONTACT_TOL,
) -> tuple[list[ContactPoint], float]:
    """Contacts against the object parts; also returns the deepest penetration.

    One contact per (capsule, part) pair at most; contact mu is the smaller of
    the capsule and object lateral coefficients.
    """
    contacts: list[ContactPoint] = []
    deepest = 0.0
    for cap in capsules:
        for part in parts:
            if capsule_part_lower_bound(cap, part) > tol:
                continue
            res = capsule_part_separation(cap, part)
            if res.distance <= tol:
                contacts.append(
                    ContactPoint(
                        res.point_on_part,
                        res.normal,
                        min(cap.mu, params.mu_lateral),
                        cap.source,
                        res.distance,
                    )
                )
                if res.distance < -deepest:
                    deepest = -res.distance
    return contacts, deepest


def world_contacts(
    capsules: list[WorldCapsule],
    support_height: float,
    params: PhysicsParams,
    tol: float = CONTACT_TOL,
) -> list[ContactPoint]:
    out = []
    for cap in capsules:
        sep, point, normal = capsule_plane_separation(cap, support_height)
        if sep <= tol:
            out.append(ContactPoint(point, normal, min(cap.mu, params.mu_lateral), "world", sep))
    return out


def min_separation(
    capsules: list[WorldCapsule],
    parts: tuple[ConvexPart, ...],
    support_height: float | None = None,
    cap: float = np.inf,
) -> float:
    """Minimum separation over all pairs (used for conservative advancement)."""
    best = cap
    for c in capsules:
        for part in parts:
            lb = capsule_part_lower_bound(c, part)
            if lb >= best:
                continue
            best = min(best, capsule_part_separation(c, part).distance)
        if support_height is not None:
            best = min(best, capsule_plane_separation(c, support_height)[0])
    return best


def obstacle_hit(
    capsules: list[WorldCapsule], obstacles: tuple[ConvexPart, ...]
) -> bool:
    """True when any capsule penetrates an obstacle."""
    for c in capsules:
        for part in obstacles:
            if capsule_part_lower_bound(c, part) > 0.0:
                continue
            if capsule_part_separation(c, part).distance < 0.0:
                return True
    return False
