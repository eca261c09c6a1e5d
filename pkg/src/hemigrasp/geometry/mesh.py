"""Triangle meshes: storage, derived quantities, OBJ / binary-STL ingestion."""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import EmptyMesh, NonWatertight

_DEGENERATE_AREA = 1e-14


@dataclass(frozen=True)
class TriMesh:
    """Immutable triangle mesh. Lengths in meters, faces index into vertices."""

    vertices: np.ndarray  # (V, 3) float64
    faces: np.ndarray  # (F, 3) int64

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=float).reshape(-1, 3))
        f = np.ascontiguousarray(np.asarray(self.faces, dtype=np.int64).reshape(-1, 3))
        if f.size and (f.min() < 0 or f.max() >= len(v)):
            raise ValueError("face index out of range")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)

    # -- derived quantities ------------------------------------------------

    def require_nonempty(self):
        if len(self.vertices) == 0 or len(self.faces) == 0:
            raise EmptyMesh("mesh has no geometry")

    def triangles(self) -> np.ndarray:
        """(F, 3, 3) corner positions."""
        return self.vertices[self.faces]

    def face_normals(self) -> np.ndarray:
        """Unit normals; zero-area faces get a zero normal."""
        tri = self.triangles()
        n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        ln = np.linalg.norm(n, axis=1)
        safe = np.where(ln > _DEGENERATE_AREA, ln, 1.0)
        return n / safe[:, None]

    def face_areas(self) -> np.ndarray:
        tri = self.triangles()
        n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        return 0.5 * np.linalg.norm(n, axis=1)

    def vertex_normals(self) -> np.ndarray:
        """Area-weighted average of incident face normals, unit length."""
        tri = self.triangles()
        fn = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])  # area-weighted
        vn = np.zeros_like(self.vertices)
        for k in range(3):
            np.add.at(vn, self.faces[:, k], fn)
        ln = np.linalg.norm(vn, axis=1)
        ln = np.where(ln > _DEGENERATE_AREA, ln, 1.0)
        return vn / ln[:, None]

    def centroid(self) -> np.ndarray:
        """Area-weighted surface centroid."""
        self.require_nonempty()
        tri = self.triangles()
        centers = tri.mean(axis=1)
        areas = self.face_areas()
        total = areas.sum()
        if total <= _DEGENERATE_AREA:
            return self.vertices.mean(axis=0)
        return (centers * areas[:, None]).sum(axis=0) / total

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        self.require_nonempty()
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def bbox_diagonal(self) -> float:
        lo, hi = self.bounds()
        return float(np.linalg.norm(hi - lo))

    def edge_counts(self) -> dict[tuple[int, int], int]:
        counts: dict[tuple[int, int], int] = {}
        for a, b, c in self.faces:
            for u, v in ((a, b), (b, c), (c, a)):
                key = (u, v) if u < v else (v, u)
                counts[key] = counts.get(key, 0) + 1
        return counts

    def is_watertight(self) -> bool:
        """Closed 2-manifold test: every edge shared by exactly two faces."""
        if len(self.faces) == 0:
            return False
        return all(c == 2 for c in self.edge_counts().values())

    def require_watertight(self):
        if not self.is_watertight():
            raise NonWatertight("mesh is not a closed 2-manifold")

    def transformed(self, pose) -> "TriMesh":
        return TriMesh(pose.apply_points(self.vertices), self.faces)

    def content_hash(self) -> int:
        """Stable 64-bit hash of the geometry (used for order-independent seeding)."""
        h = hashlib.sha256()
        h.update(self.vertices.tobytes())
        h.update(self.faces.tobytes())
        return int.from_bytes(h.digest()[:8], "little")

    def drop_degenerate_faces(self) -> "TriMesh":
        keep = self.face_areas() > _DEGENERATE_AREA
        return TriMesh(self.vertices, self.faces[keep])


# -- file ingestion ----------------------------------------------------------


def load_mesh(path: str | Path) -> TriMesh:
    """Load OBJ or binary STL (positions and faces only)."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".obj":
        return load_obj(path)
    if suffix == ".stl":
        return load_stl(path)
    raise ValueError(f"unsupported mesh format: {path.name}")


def load_obj(path: str | Path) -> TriMesh:
    vertices: list[list[float]] = []
    faces: list[list[int]] = []
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                vertices.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                idx = [int(tok.split("/")[0]) for tok in parts[1:]]
                idx = [i - 1 if i > 0 else len(vertices) + i for i in idx]
                for k in range(1, len(idx) - 1):  # fan-triangulate polygons
                    faces.append([idx[0], idx[k], idx[k + 1]])
    if not vertices or not faces:
        raise EmptyMesh(f"no geometry in {path}")
    return TriMesh(np.array(vertices), np.array(faces))


def save_obj(mesh: TriMesh, path: str | Path):
    with open(path, "w", encoding="utf-8") as fh:
        for v in mesh.vertices:
            fh.write(f"v {v[0]!r} {v[1]!r} {v[2]!r}\n")
        for f in mesh.faces:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")


def load_stl(path: str | Path) -> TriMesh:
    """Binary STL; vertices deduplicated exactly."""
    with open(path, "rb") as fh:
        fh.read(80)
        (count,) = struct.unpack("<I", fh.read(4))
        data = np.frombuffer(fh.read(count * 50), dtype=np.uint8)
    if len(data) < count * 50:
        raise EmptyMesh(f"truncated STL: {path}")
    rec = data.reshape(count, 50)
    tris = rec[:, 12:48].copy().view("<f4").reshape(count, 3, 3).astype(float)
    flat = tris.reshape(-1, 3)
    uniq, inverse = np.unique(flat, axis=0, return_inverse=True)
    faces = inverse.reshape(-1, 3)
    if count == 0:
        raise EmptyMesh(f"no geometry in {path}")
    return TriMesh(uniq, faces)


def save_stl(mesh: TriMesh, path: str | Path):
    tri = mesh.triangles().astype("<f4")
    normals = mesh.face_normals().astype("<f4")
    with open(path, "wb") as fh:
        fh.write(b"\x00" * 80)
        fh.write(struct.pack("<I", len(tri)))
        for n, t in zip(normals, tri):
            fh.write(n.tobytes())
            fh.write(t.tobytes())
            fh.write(b"\x00\x00")
