"""Gravity-resistibility hold test: LP feasibility of contact force balance.

Quasi-static substitute for dropping the support surface under the grasped
object: the grasp holds iff bounded friction-cone forces at the hand-object
contacts can exactly oppose the object's gravity wrench about its reference
point. World (support) contacts are excluded -- the support is leaving.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from ..errors import InvalidConeCount
from ..quality import friction_cone_edges
from ..contacts import ContactPoint
from .scene import PhysicsParams


def hold_test(
    contacts: list[ContactPoint],
    params: PhysicsParams,
    cone_edges: int = 8,
    f_max: float = 20.0,
    object_reference=(0.0, 0.0, 0.0),
    gravity_dir=(0.0, 0.0, -1.0),
) -> bool:
    """True iff hand-object contact forces can balance gravity.

    Per contact, the force is a nonnegative combination of its discretized
    friction-cone edges with the coefficient sum capped at f_max (the linear
    stand-in for a force-magnitude limit).
    """
    if cone_edges < 3:
        raise InvalidConeCount("cone_edges must be >= 3")
    if f_max <= 0:
        raise ValueError("f_max must be positive")
    hand = [c for c in contacts if not c.is_world()]
    if not hand:
        return False
    ref = np.asarray(object_reference, dtype=float).reshape(3)
    g = np.asarray(gravity_dir, dtype=float)
    g = g / np.linalg.norm(g)
    target = np.concatenate([-params.mass * params.gravity * g, np.zeros(3)])

    cols = []
    groups = []
    for i, c in enumerate(hand):
        edges = friction_cone_edges(-c.normal, c.mu, cone_edges, seed=c.position - ref)
        arm = c.position - ref
        block = np.hstack([edges, np.cross(np.broadcast_to(arm, edges.shape), edges)])
        cols.append(block)
        groups.extend([i] * len(edges))
    A_eq = np.vstack(cols).T  # (6, n_vars)
    b_eq = target
    n_vars = A_eq.shape[1]
    groups = np.asarray(groups)
    A_ub = np.zeros((len(hand), n_vars))
    A_ub[groups, np.arange(n_vars)] = 1.0
    b_ub = np.full(len(hand), f_max)
    res = linprog(
        np.zeros(n_vars),
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=(0.0, None),
        method="highs",
    )
    return bool(res.success)
