"""Grasp wrench space: friction cone discretization, force closure, ε quality.

Conventions (documented because the upstream tooling never states its own):
per-contact unit total force with the hull taken over the union of all cone
edge wrenches; torque components pre-scaled by `torque_scale` (1 / the
object's max radius about the reference point). The azimuthal phase of each
discretized cone follows the contact's own position relative to the
reference, so the wrench set transforms covariantly under rotations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from .contacts import ContactPoint
from .errors import InvalidConeCount

_INTERIOR_TOL = 1e-12


@dataclass(frozen=True)
class WrenchSet:
    """Discretized grasp wrench space: one group of cone-edge wrenches per contact."""

    wrenches: np.ndarray  # (n_contacts * cone_edges, 6) -- or (n, 6) with mu=0 singletons
    torque_scale: float
    reference: np.ndarray
    cone_edges: int
    n_contacts: int


def _cone_tangents(axis: np.ndarray, seed: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Tangent basis phased by `seed` so the cone rotates with the contact set."""
    s = seed - float(seed @ axis) * axis
    n = float(np.linalg.norm(s))
    if n < 1e-12:
        for fallback in ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)):
            s = np.asarray(fallback) - float(np.asarray(fallback) @ axis) * axis
            n = float(np.linalg.norm(s))
            if n > 1e-12:
                break
    t1 = s / n
    return t1, np.cross(axis, t1)


def friction_cone_edges(
    force_axis: np.ndarray, mu: float, cone_edges: int, seed: np.ndarray | None = None
) -> np.ndarray:
    """Unit force directions on the Coulomb cone of half-angle atan(mu).

    mu = 0 degenerates to the single axis direction.
    """
    axis = np.asarray(force_axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    if mu <= 0.0:
        return axis[None, :]
    if cone_edges < 3:
        raise InvalidConeCount("friction cone needs at least 3 edges")
    t1, t2 = _cone_tangents(axis, seed if seed is not None else np.array([1.0, 0.0, 0.0]))
    half = math.atan(mu)
    c, s = math.cos(half), math.sin(half)
    theta = 2.0 * np.pi * np.arange(cone_edges) / cone_edges
    return (
        c * axis[None, :]
        + s * (np.cos(theta)[:, None] * t1[None, :] + np.sin(theta)[:, None] * t2[None, :])
    )


def wrench_set(
    contacts: list[ContactPoint],
    cone_edges: int = 8,
    torque_scale: float = 1.0,
    reference=(0.0, 0.0, 0.0),
) -> WrenchSet:
    """Unit-force cone-edge wrenches (f, scale * (p - ref) x f) for each contact."""
    if cone_edges < 3:
        raise InvalidConeCount("cone_edges must be >= 3")
    if torque_scale <= 0:
        raise ValueError("torque_scale must be positive")
    reference = np.asarray(reference, dtype=float).reshape(3)
    rows = []
    for c in contacts:
        arm = c.position - reference
        force_axis = -c.normal  # force the hand can apply points into the object
        edges = friction_cone_edges(force_axis, c.mu, cone_edges, seed=arm)
        torques = torque_scale * np.cross(np.broadcast_to(arm, edges.shape), edges)
        rows.append(np.hstack([edges, torques]))
    wrenches = np.vstack(rows) if rows else np.zeros((0, 6))
    return WrenchSet(wrenches, torque_scale, reference, cone_edges, len(contacts))


def force_closure(ws: WrenchSet) -> bool:
    """True iff the 6D origin lies strictly inside the hull of the wrench set.

    Decided by LP: the wrenches must span R^6 and admit a strictly positive
    convex combination summing to zero.
    """
    W = ws.wrenches
    n = len(W)
    if n < 7:
        return False
    if np.linalg.matrix_rank(W) < 6:
        return False
    # maximize s subject to W^T lambda = 0, sum lambda = 1, lambda_i >= s
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_eq = np.zeros((7, n + 1))
    A_eq[:6, :n] = W.T
    A_eq[6, :n] = 1.0
    b_eq = np.zeros(7)
    b_eq[6] = 1.0
    A_ub = np.hstack([-np.eye(n), np.ones((n, 1))])
    b_ub = np.zeros(n)
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=[(0.0, 1.0)] * n + [(-1.0, 1.0)],
        method="highs",
    )
    return bool(res.success) and float(res.x[-1]) > _INTERIOR_TOL


def epsilon_quality(ws: WrenchSet) -> float:
    """Radius of the largest origin-centered ball inside the wrench-space hull.

    0 when the origin is not strictly interior (including degenerate hulls).
    """
    eps, _ = epsilon_quality_details(ws)
    return eps


def epsilon_quality_details(ws: WrenchSet) -> tuple[float, bool]:
    """(epsilon, degenerate): degenerate marks affinely dependent wrench sets."""
    W = ws.wrenches
    if len(W) < 7:
        return 0.0, len(W) > 0
    try:
        hull = ConvexHull(W)
    except QhullError:
        return 0.0, True
    offsets = hull.equations[:, 6]
    worst = float(offsets.max())  # signed distance of origin to the outermost facet
    if worst >= -_INTERIOR_TOL:
        return 0.0, False
    return -worst, False
