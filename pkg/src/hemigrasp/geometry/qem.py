"""Mesh decimation by quadric-error edge collapse (Garland-Heckbert).

Per-vertex 4x4 quadrics are summed from incident face planes; edge collapses
pop in ascending error order from a lazy heap (stale entries are recosted and
requeued when popped). Collapse placement solves the 3x3 quadric system when
invertible, otherwise falls back to the edge midpoint. Collapses that flip a
surviving face normal are skipped. Boundary edges receive a large penalty
quadric from the plane through the edge perpendicular to the adjacent face.
"""

from __future__ import annotations

import heapq

import numpy as np

from ..errors import EmptyMesh, InvalidTarget
from .mesh import TriMesh

# upper-triangle layout of the symmetric 4x4 quadric
# [a00 a01 a02 a03 a11 a12 a13 a22 a23 a33]

_DET_REL_TOL = 1e-10


def _plane_quadrics(mesh: TriMesh) -> np.ndarray:
    """(V, 10) per-vertex quadrics from incident face planes (unit normals)."""
    tri = mesh.triangles()
    n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    ln = np.linalg.norm(n, axis=1)
    keep = ln > 1e-14
    n = np.where(keep[:, None], n / np.where(keep, ln, 1.0)[:, None], 0.0)
    d = -np.einsum("ij,ij->i", n, tri[:, 0])
    p = np.column_stack([n, d])  # (F, 4)
    fq = np.stack(
        [
            p[:, 0] * p[:, 0], p[:, 0] * p[:, 1], p[:, 0] * p[:, 2], p[:, 0] * p[:, 3],
            p[:, 1] * p[:, 1], p[:, 1] * p[:, 2], p[:, 1] * p[:, 3],
            p[:, 2] * p[:, 2], p[:, 2] * p[:, 3],
            p[:, 3] * p[:, 3],
        ],
        axis=1,
    )
    q = np.zeros((len(mesh.vertices), 10))
    for k in range(3):
        np.add.at(q, mesh.faces[:, k], fq)
    return q


def _boundary_penalties(mesh: TriMesh, quadrics: np.ndarray, weight: float = 1e3):
    """Add penalty quadrics along open-boundary edges (preserves open rims)."""
    counts: dict[tuple[int, int], list[int]] = {}
    for fi, (a, b, c) in enumerate(mesh.faces):
        for u, v in ((a, b), (b, c), (c, a)):
            key = (u, v) if u < v else (v, u)
            counts.setdefault(key, []).append(fi)
    normals = mesh.face_normals()
    verts = mesh.vertices
    for (u, v), fids in counts.items():
        if len(fids) != 1:
            continue
        e = verts[v] - verts[u]
        n = np.cross(normals[fids[0]], e)
        ln = np.linalg.norm(n)
        if ln < 1e-14:
            continue
        n /= ln
        d = -float(n @ verts[u])
        p = np.array([n[0], n[1], n[2], d])
        fq = weight * float(e @ e) * np.array(
            [
                p[0] * p[0], p[0] * p[1], p[0] * p[2], p[0] * p[3],
                p[1] * p[1], p[1] * p[2], p[1] * p[3],
                p[2] * p[2], p[2] * p[3],
                p[3] * p[3],
            ]
        )
        quadrics[u] += fq
        quadrics[v] += fq


def _edge_cost(q: np.ndarray, pu, pv) -> tuple[float, float, float, float]:
    """Optimal collapse position and cost for a summed quadric (10,)."""
    a00, a01, a02, b0, a11, a12, b1, a22, b2, c = (float(x) for x in q)
    det = (
        a00 * (a11 * a22 - a12 * a12)
        - a01 * (a01 * a22 - a12 * a02)
        + a02 * (a01 * a12 - a11 * a02)
    )
    scale = max(abs(a00), abs(a01), abs(a02), abs(a11), abs(a12), abs(a22), 1e-300)
    if abs(det) > _DET_REL_TOL * scale * scale * scale:
        inv = 1.0 / det
        x = -inv * (
            b0 * (a11 * a22 - a12 * a12)
            - a01 * (b1 * a22 - a12 * b2)
            + a02 * (b1 * a12 - a11 * b2)
        )
        y = -inv * (
            a00 * (b1 * a22 - b2 * a12)
            - b0 * (a01 * a22 - a12 * a02)
            + a02 * (a01 * b2 - b1 * a02)
        )
        z = -inv * (
            a00 * (a11 * b2 - b1 * a12)
            - a01 * (a01 * b2 - b1 * a02)
            + b0 * (a01 * a12 - a11 * a02)
        )
    else:
        x = 0.5 * (pu[0] + pv[0])
        y = 0.5 * (pu[1] + pv[1])
        z = 0.5 * (pu[2] + pv[2])
    cost = (
        a00 * x * x + a11 * y * y + a22 * z * z
        + 2.0 * (a01 * x * y + a02 * x * z + a12 * y * z + b0 * x + b1 * y + b2 * z)
        + c
    )
    return (cost if cost > 0.0 else 0.0, x, y, z)


def _initial_costs(edges: np.ndarray, quadrics: np.ndarray, verts: np.ndarray):
    """Vectorized optimal-position costs for the initial edge set."""
    q = quadrics[edges[:, 0]] + quadrics[edges[:, 1]]
    a00, a01, a02, b0 = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    a11, a12, b1 = q[:, 4], q[:, 5], q[:, 6]
    a22, b2, c = q[:, 7], q[:, 8], q[:, 9]
    det = (
        a00 * (a11 * a22 - a12 * a12)
        - a01 * (a01 * a22 - a12 * a02)
        + a02 * (a01 * a12 - a11 * a02)
    )
    scale = np.maximum.reduce(
        [np.abs(a00), np.abs(a01), np.abs(a02), np.abs(a11), np.abs(a12), np.abs(a22)]
    )
    ok = np.abs(det) > _DET_REL_TOL * scale**3
    inv = np.where(ok, det, 1.0)
    x = -(
        b0 * (a11 * a22 - a12 * a12)
        - a01 * (b1 * a22 - a12 * b2)
        + a02 * (b1 * a12 - a11 * b2)
    ) / inv
    y = -(
        a00 * (b1 * a22 - b2 * a12)
        - b0 * (a01 * a22 - a12 * a02)
        + a02 * (a01 * b2 - b1 * a02)
    ) / inv
    z = -(
        a00 * (a11 * b2 - b1 * a12)
        - a01 * (a01 * b2 - b1 * a02)
        + b0 * (a01 * a12 - a11 * a02)
    ) / inv
    mid = 0.5 * (verts[edges[:, 0]] + verts[edges[:, 1]])
    pos = np.where(ok[:, None], np.column_stack([x, y, z]), mid)
    px, py, pz = pos[:, 0], pos[:, 1], pos[:, 2]
    cost = (
        a00 * px * px + a11 * py * py + a22 * pz * pz
        + 2.0 * (a01 * px * py + a02 * px * pz + a12 * py * pz + b0 * px + b1 * py + b2 * pz)
        + c
    )
    return np.maximum(cost, 0.0), pos


def decimate_qem(mesh: TriMesh, target_faces: int = 1000) -> TriMesh:
    """Collapse edges in ascending quadric-error order until <= target_faces.

    Returns the input unchanged when it is already at or below the target.
    """
    if target_faces < 4:
        raise InvalidTarget("a closed surface needs at least 4 faces")
    mesh.require_nonempty()
    if len(mesh.faces) <= target_faces:
        return mesh

    quadrics = _plane_quadrics(mesh)
    _boundary_penalties(mesh, quadrics)

    nv = len(mesh.vertices)
    pos: list[tuple[float, float, float]] = [tuple(p) for p in mesh.vertices]
    faces: list[list[int]] = [list(f) for f in mesh.faces]
    face_alive = [True] * len(faces)
    vfaces: list[set[int]] = [set() for _ in range(nv)]
    nbrs: list[set[int]] = [set() for _ in range(nv)]
    for fi, (a, b, c) in enumerate(faces):
        vfaces[a].add(fi)
        vfaces[b].add(fi)
        vfaces[c].add(fi)
        nbrs[a].update((b, c))
        nbrs[b].update((a, c))
        nbrs[c].update((a, b))
    alive = [True] * nv
    version = [0] * nv

    edge_arr = np.array(
        sorted({(u, v) for u in range(nv) for v in nbrs[u] if u < v}), dtype=np.int64
    )
    costs, places = _initial_costs(edge_arr, quadrics, mesh.vertices)
    counter = 0
    heap: list[tuple] = []
    for (u, v), cst, pl in zip(edge_arr.tolist(), costs.tolist(), places.tolist()):
        heap.append((cst, counter, u, v, 0, 0, pl[0], pl[1], pl[2]))
        counter += 1
    heapq.heapify(heap)

    n_alive_faces = len(faces)

    def face_flips(fid: int, moved: int, px: float, py: float, pz: float) -> bool:
        a, b, c = faces[fid]
        pa, pb, pc = pos[a], pos[b], pos[c]
        ox = (pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2])
        oy = (pc[0] - pa[0], pc[1] - pa[1], pc[2] - pa[2])
        n0x = ox[1] * oy[2] - ox[2] * oy[1]
        n0y = ox[2] * oy[0] - ox[0] * oy[2]
        n0z = ox[0] * oy[1] - ox[1] * oy[0]
        qa = (px, py, pz) if a == moved else pa
        qb = (px, py, pz) if b == moved else pb
        qc = (px, py, pz) if c == moved else pc
        ux = (qb[0] - qa[0], qb[1] - qa[1], qb[2] - qa[2])
        uy = (qc[0] - qa[0], qc[1] - qa[1], qc[2] - qa[2])
        n1x = ux[1] * uy[2] - ux[2] * uy[1]
        n1y = ux[2] * uy[0] - ux[0] * uy[2]
        n1z = ux[0] * uy[1] - ux[1] * uy[0]
        dot = n0x * n1x + n0y * n1y + n0z * n1z
        n1sq = n1x * n1x + n1y * n1y + n1z * n1z
        n0sq = n0x * n0x + n0y * n0y + n0z * n0z
        return dot <= 0.0 or n1sq < 1e-12 * n0sq

    while n_alive_faces > target_faces and heap:
        cst, _, u, v, vu, vv, px, py, pz = heapq.heappop(heap)
        if not (alive[u] and alive[v]) or v not in nbrs[u]:
            continue
        if version[u] != vu or version[v] != vv:
            q = quadrics[u] + quadrics[v]
            ncost, nx, ny, nz = _edge_cost(q, pos[u], pos[v])
            heapq.heappush(heap, (ncost, counter, u, v, version[u], version[v], nx, ny, nz))
            counter += 1
            continue

        shared = vfaces[u] & vfaces[v]
        rejected = False
        for fid in vfaces[u]:
            if fid not in shared and face_flips(fid, u, px, py, pz):
                rejected = True
                break
        if not rejected:
            for fid in vfaces[v]:
                if fid not in shared and face_flips(fid, v, px, py, pz):
                    rejected = True
                    break
        if rejected:
            continue  # blocked; neighborhood changes will requeue it

        # commit: merge v into u at the placed position
        pos[u] = (px, py, pz)
        quadrics[u] += quadrics[v]
        alive[v] = False
        version[u] += 1
        version[v] += 1
        for fid in shared:
            face_alive[fid] = False
            n_alive_faces -= 1
            for w in faces[fid]:
                vfaces[w].discard(fid)
        for fid in list(vfaces[v]):
            fl = faces[fid]
            faces[fid] = [u if w == v else w for w in fl]
            vfaces[v].discard(fid)
            vfaces[u].add(fid)
        new_nbrs = (nbrs[u] | nbrs[v]) - {u, v}
        for x in nbrs[u]:
            nbrs[x].discard(u)
        for x in nbrs[v]:
            nbrs[x].discard(v)
        nbrs[v] = set()
        nbrs[u] = new_nbrs
        for x in new_nbrs:
            nbrs[x].add(u)
            q = quadrics[u] + quadrics[x]
            ncost, nx, ny, nz = _edge_cost(q, pos[u], pos[x])
            heapq.heappush(heap, (ncost, counter, u, x, version[u], version[x], nx, ny, nz))
            counter += 1

    # compact surviving geometry
    remap = -np.ones(nv, dtype=np.int64)
    out_verts = []
    for vid in range(nv):
        if alive[vid]:
            remap[vid] = len(out_verts)
            out_verts.append(pos[vid])
    out_faces = [
        [remap[a], remap[b], remap[c]]
        for fid, (a, b, c) in enumerate(faces)
        if face_alive[fid] and a != b and b != c and a != c
    ]
    if not out_faces:
        raise EmptyMesh("decimation consumed the whole mesh")
    result = TriMesh(np.array(out_verts), np.array(out_faces)).drop_degenerate_faces()
    # drop unreferenced vertices
    used = np.unique(result.faces)
    remap2 = -np.ones(len(result.vertices), dtype=np.int64)
    remap2[used] = np.arange(len(used))
    return TriMesh(result.vertices[used], remap2[result.faces])
