"""Narrow-phase proximity queries: capsule vs convex part, capsule vs plane.

Capsule-vs-part separation is exact: the segment-to-polytope distance is the
minimum over boundary triangles (segment/edge pairs, endpoint projections,
plane crossings), minus the capsule radius. A segment whose core enters the
polytope reports the negative plane-depth of its deeper endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..geometry.convex import ConvexPart
from ..hand import WorldCapsule


@dataclass(frozen=True)
class ProximityResult:
    distance: float  # segment core to part surface; negative when core inside
    point_on_segment: np.ndarray
    point_on_part: np.ndarray
    normal: np.ndarray  # unit, from part surface toward the segment


class _TrianglePack:
    """Precomputed per-part arrays for batched queries."""

    def __init__(self, part: ConvexPart):
        tri = part.vertices[part.faces]
        self.a = tri[:, 0]
        self.b = tri[:, 1]
        self.c = tri[:, 2]
        self.ab = self.b - self.a
        self.ac = self.c - self.a
        self.bc = self.c - self.b
        # all edge segments (3F, 3) origin + direction
        self.edge_o = np.vstack([self.a, self.b, self.c])
        self.edge_d = np.vstack([self.ab, self.bc, -self.ac])
        self.planes = part.planes
        self.center, self.bound_radius = part.bounding_sphere()


_PACKS: dict[int, _TrianglePack] = {}


def _pack(part: ConvexPart) -> _TrianglePack:
    key = id(part)
    pack = _PACKS.get(key)
    if pack is None or pack.planes is not part.planes:
        pack = _TrianglePack(part)
        _PACKS[key] = pack
        if len(_PACKS) > 4096:
            _PACKS.clear()
            _PACKS[key] = pack
    return pack


def _point_tris_closest(p: np.ndarray, pack: _TrianglePack):
    """Closest points on every triangle to a single point: (d2 (F,), cp (F,3))."""
    a, b, c, ab, ac, bc = pack.a, pack.b, pack.c, pack.ab, pack.ac, pack.bc
    ap = p - a
    d1 = np.einsum("fk,fk->f", ab, ap)
    d2 = np.einsum("fk,fk->f", ac, ap)
    bp = p - b
    d3 = np.einsum("fk,fk->f", ab, bp)
    d4 = np.einsum("fk,fk->f", ac, bp)
    cp_ = p - c
    d5 = np.einsum("fk,fk->f", ab, cp_)
    d6 = np.einsum("fk,fk->f", ac, cp_)
    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4
    with np.errstate(divide="ignore", invalid="ignore"):
        t_ab = np.where(d1 - d3 != 0, d1 / (d1 - d3), 0.0)
        t_ac = np.where(d2 - d6 != 0, d2 / (d2 - d6), 0.0)
        d43 = d4 - d3
        d56 = d5 - d6
        t_bc = np.where(d43 + d56 != 0, d43 / (d43 + d56), 0.0)
        denom = va + vb + vc
        inv = np.where(denom != 0, 1.0 / denom, 0.0)
    v_in = vb * inv
    w_in = vc * inv
    cp = a + v_in[:, None] * ab + w_in[:, None] * ac
    cp = np.where(((va <= 0) & (d43 >= 0) & (d56 >= 0))[:, None], b + t_bc[:, None] * bc, cp)
    cp = np.where(((vb <= 0) & (d2 >= 0) & (d6 <= 0))[:, None], a + t_ac[:, None] * ac, cp)
    cp = np.where(((vc <= 0) & (d1 >= 0) & (d3 <= 0))[:, None], a + t_ab[:, None] * ab, cp)
    cp = np.where(((d6 >= 0) & (d5 <= d6))[:, None], c, cp)
    cp = np.where(((d3 >= 0) & (d4 <= d3))[:, None], b, cp)
    cp = np.where(((d1 <= 0) & (d2 <= 0))[:, None], a, cp)
    diff = p - cp
    return np.einsum("fk,fk->f", diff, diff), cp


def _seg_edges_closest(p0, p1, pack: _TrianglePack):
    """Closest pairs between the segment and every triangle edge."""
    d1 = p1 - p0
    A = pack.edge_o
    D = pack.edge_d
    r = p0 - A
    a = float(d1 @ d1)
    e = np.einsum("mk,mk->m", D, D)
    f = np.einsum("mk,mk->m", D, r)
    c = np.einsum("k,mk->m", d1, r)
    b = np.einsum("k,mk->m", d1, D)
    denom = a * e - b * b
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(denom > 1e-30, (b * f - c * e) / denom, 0.0)
    s = np.clip(s, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(e > 1e-30, (b * s + f) / e, 0.0)
    t_cl = np.clip(t, 0.0, 1.0)
    if a > 1e-30:
        s = np.clip((b * t_cl - c) / a, 0.0, 1.0)
    cp1 = p0 + s[:, None] * d1
    cp2 = A + t_cl[:, None] * D
    diff = cp1 - cp2
    return np.einsum("mk,mk->m", diff, diff), cp1, cp2


def segment_part_query(p0: np.ndarray, p1: np.ndarray, part: ConvexPart) -> ProximityResult:
    """Exact distance and witness points between a segment and a convex part."""
    pack = _pack(part)
    planes_n = pack.planes[:, :3]
    planes_d = pack.planes[:, 3]
    D0 = planes_n @ p0 + planes_d
    D1 = planes_n @ p1 + planes_d
    sd0 = float(D0.max())
    sd1 = float(D1.max())
    if sd0 <= 0.0 or sd1 <= 0.0:
        # core inside; report the deeper endpoint against its nearest plane
        if sd0 <= sd1:
            pe, sd, Dv = p0, sd0, D0
        else:
            pe, sd, Dv = p1, sd1, D1
        j = int(np.argmax(Dv))
        n = planes_n[j]
        return ProximityResult(sd, pe, pe - float(Dv[j]) * n, n.copy())

    best_d2 = np.inf
    best_seg = best_part = None

    d2e, cp1e, cp2e = _seg_edges_closest(p0, p1, pack)
    j = int(np.argmin(d2e))
    best_d2, best_seg, best_part = float(d2e[j]), cp1e[j], cp2e[j]

    for pe in (p0, p1):
        d2p, cpp = _point_tris_closest(pe, pack)
        j = int(np.argmin(d2p))
        if float(d2p[j]) < best_d2:
            best_d2, best_seg, best_part = float(d2p[j]), pe, cpp[j]

    # segment piercing a face: both endpoints outside but crossing inside a triangle
    fn = planes_n
    h0 = fn @ p0 + planes_d
    h1 = fn @ p1 + planes_d
    crossing = (h0 > 0) != (h1 > 0)
    if crossing.any():
        idx = np.nonzero(crossing)[0]
        t = h0[idx] / (h0[idx] - h1[idx])
        x = p0 + t[:, None] * (p1 - p0)
        rel = x - pack.a[idx]
        d00 = np.einsum("fk,fk->f", pack.ab[idx], pack.ab[idx])
        d01 = np.einsum("fk,fk->f", pack.ab[idx], pack.ac[idx])
        d11 = np.einsum("fk,fk->f", pack.ac[idx], pack.ac[idx])
        e0 = np.einsum("fk,fk->f", rel, pack.ab[idx])
        e1 = np.einsum("fk,fk->f", rel, pack.ac[idx])
        det = d00 * d11 - d01 * d01
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.where(det != 0, (d11 * e0 - d01 * e1) / det, -1.0)
            w = np.where(det != 0, (d00 * e1 - d01 * e0) / det, -1.0)
        hit = (v >= 0) & (w >= 0) & (v + w <= 1)
        if hit.any():
            k = int(np.nonzero(hit)[0][0])
            pt = x[k]
            return ProximityResult(0.0, pt, pt.copy(), planes_n[idx[k]].copy())

    dist = float(np.sqrt(best_d2))
    if dist > 1e-12:
        normal = (best_seg - best_part) / dist
    else:
        normal = planes_n[int(np.argmax(planes_n @ best_part + planes_d))].copy()
    return ProximityResult(dist, best_seg, best_part, normal)


def capsule_part_separation(cap: WorldCapsule, part: ConvexPart) -> ProximityResult:
    """Surface separation (core distance minus radius), same witnesses."""
    res = segment_part_query(cap.p0, cap.p1, part)
    return ProximityResult(
        res.distance - cap.radius, res.point_on_segment, res.point_on_part, res.normal
    )


def capsule_part_lower_bound(cap: WorldCapsule, part: ConvexPart) -> float:
    """Cheap lower bound on separation via the part's bounding sphere."""
    pack = _pack(part)
    d = pack.center - cap.p0
    seg = cap.p1 - cap.p0
    ss = float(seg @ seg)
    t = float(np.clip((d @ seg) / ss, 0.0, 1.0)) if ss > 1e-30 else 0.0
    closest = cap.p0 + t * seg
    return float(np.linalg.norm(pack.center - closest)) - pack.bound_radius - cap.radius


def capsule_plane_separation(cap: WorldCapsule, height: float):
    """Separation of a capsule above the horizontal plane z = height.

    Returns (separation, point_on_plane, normal(+z)).
    """
    z0, z1 = float(cap.p0[2]), float(cap.p1[2])
    if abs(z0 - z1) < 1e-12:
        low = 0.5 * (cap.p0 + cap.p1)
    elif z0 < z1:
        low = cap.p0
    else:
        low = cap.p1
    sep = min(z0, z1) - cap.radius - height
    point = np.array([low[0], low[1], height])
    return sep, point, np.array([0.0, 0.0, 1.0])
