"""Watertight primitive meshes used by tests, benchmarks, and demo scenes."""

from __future__ import annotations

import numpy as np

from .mesh import TriMesh


def box(size=(1.0, 1.0, 1.0), center=(0.0, 0.0, 0.0)) -> TriMesh:
    """Axis-aligned box, 12 triangles, outward normals."""
    sx, sy, sz = (0.5 * s for s in size)
    cx, cy, cz = center
    v = np.array(
        [
            [-sx, -sy, -sz], [sx, -sy, -sz], [sx, sy, -sz], [-sx, sy, -sz],
            [-sx, -sy, sz], [sx, -sy, sz], [sx, sy, sz], [-sx, sy, sz],
        ]
    ) + np.array([cx, cy, cz])
    f = np.array(
        [
            [0, 2, 1], [0, 3, 2],  # bottom (-z)
            [4, 5, 6], [4, 6, 7],  # top (+z)
            [0, 1, 5], [0, 5, 4],  # -y
            [2, 3, 7], [2, 7, 6],  # +y
            [1, 2, 6], [1, 6, 5],  # +x
            [3, 0, 4], [3, 4, 7],  # -x
        ]
    )
    return TriMesh(v, f)


def icosphere(radius=1.0, subdivisions=2, center=(0.0, 0.0, 0.0)) -> TriMesh:
    """Subdivided icosahedron; 20 * 4^n faces."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=float,
    )
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [tuple(v) for v in verts]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(i, j):
            key = (i, j) if i < j else (j, i)
            if key not in cache:
                m = np.array(verts[i]) + np.array(verts[j])
                m /= np.linalg.norm(m)
                verts.append(tuple(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    v = np.array(verts) * radius + np.array(center)
    return TriMesh(v, np.array(faces))


def cylinder(radius=0.05, height=0.1, segments=32, center=(0.0, 0.0, 0.0)) -> TriMesh:
    """Closed cylinder along z, caps fan-triangulated from center points."""
    cx, cy, cz = center
    angles = np.linspace(0.0, 2.0 * np.pi, segments, endpoint=False)
    ring = np.stack([radius * np.cos(angles), radius * np.sin(angles)], axis=1)
    lo, hi = cz - height / 2.0, cz + height / 2.0
    bottom = np.column_stack([ring[:, 0] + cx, ring[:, 1] + cy, np.full(segments, lo)])
    top = np.column_stack([ring[:, 0] + cx, ring[:, 1] + cy, np.full(segments, hi)])
    v = np.vstack([bottom, top, [[cx, cy, lo]], [[cx, cy, hi]]])
    cb, ct = 2 * segments, 2 * segments + 1
    faces = []
    for i in range(segments):
        j = (i + 1) % segments
        faces += [
            [i, j, segments + j], [i, segments + j, segments + i],  # wall
            [cb, j, i],  # bottom cap, normal -z
            [ct, segments + i, segments + j],  # top cap, normal +z
        ]
    return TriMesh(v, np.array(faces))


def l_shape(leg=0.1, thickness=0.04, depth=0.04) -> TriMesh:
    """L-shaped solid (two fused boxes), watertight, for decomposition tests."""
    # vertical bar [0,t]x[0,d]x[0,leg]; horizontal bar [0,leg]x[0,d]x[0,t]
    t, d, L = thickness, depth, leg
    v = np.array(
        [
            [0, 0, 0], [L, 0, 0], [L, 0, t], [t, 0, t], [t, 0, L], [0, 0, L],
            [0, d, 0], [L, d, 0], [L, d, t], [t, d, t], [t, d, L], [0, d, L],
        ],
        dtype=float,
    )
    front = [(0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5)]  # y=0, normal -y
    faces = [(a, c, b) for a, b, c in front]
    faces += [(a + 6, b + 6, c + 6) for a, b, c in front]  # y=d, normal +y
    outline = [0, 1, 2, 3, 4, 5]
    for i in range(6):
        a, b = outline[i], outline[(i + 1) % 6]
        faces += [(a, b, b + 6), (a, b + 6, a + 6)]
    return TriMesh(v, np.array(faces))


def flat_sheet(size=1.0) -> TriMesh:
    """Zero-thickness square; deliberately non-voxelizable."""
    v = np.array([[0, 0, 0], [size, 0, 0], [size, size, 0], [0, size, 0]], dtype=float)
    f = np.array([[0, 1, 2], [0, 2, 3]])
    return TriMesh(v, f)
