"""Convex parts and a recursive axis-split approximate convex decomposition.

Collision queries downstream require convex geometry. The decomposition
recursively splits along the longest principal axis of the part's voxel
point set until the voxel-counted concavity (hull volume minus part volume,
over hull volume) drops below tolerance. Each emitted part is the convex
hull of the part's surface samples, so the union of part hulls contains
every input vertex. This is deliberately simpler than VHACD; only the
convex-cover contract matters downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from ..errors import EmptyMesh, NonVoxelizable
from .mesh import TriMesh
from .shape_metrics import sample_surface
from .voxel import VoxelGrid, voxelize_on_grid, voxelize_resolution

_MIN_VOXELS = 8
_MIN_POINTS = 8
_MAX_DEPTH = 12
_SURFACE_SAMPLES = 2048


@dataclass(frozen=True)
class ConvexPart:
    """Convex polytope: hull vertices, triangle faces, outward face planes."""

    vertices: np.ndarray  # (V, 3)
    faces: np.ndarray  # (F, 3)
    planes: np.ndarray  # (F, 4): n.x + d <= 0 inside, |n| = 1
    concavity: float = 0.0  # voxel-measured concavity at emission time

    @staticmethod
    def from_points(points: np.ndarray, concavity: float = 0.0) -> "ConvexPart":
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        try:
            hull = ConvexHull(points)
        except QhullError as exc:
            raise NonVoxelizable(f"degenerate point set for convex hull: {exc}") from exc
        idx = hull.vertices
        remap = -np.ones(len(points), dtype=np.int64)
        remap[idx] = np.arange(len(idx))
        verts = points[idx]
        faces = remap[hull.simplices]
        planes = hull.equations.copy()  # (F, 4), outward unit normals
        # qhull simplices are not consistently wound; align winding with normals
        tri = verts[faces]
        n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        flip = np.einsum("ij,ij->i", n, planes[:, :3]) < 0
        faces[flip] = faces[flip][:, [0, 2, 1]]
        return ConvexPart(verts, faces, planes, concavity)

    def contains(self, points: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        """Boolean mask: inside (or within tol of) every face plane."""
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        d = points @ self.planes[:, :3].T + self.planes[:, 3]
        return (d <= tol).all(axis=1)

    def signed_distance_bound(self, points: np.ndarray) -> np.ndarray:
        """Max plane distance per point: negative inside, lower bound outside."""
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        d = points @ self.planes[:, :3].T + self.planes[:, 3]
        return d.max(axis=1)

    def volume(self) -> float:
        return float(ConvexHull(self.vertices).volume)

    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    def bounding_sphere(self) -> tuple[np.ndarray, float]:
        c = self.centroid()
        return c, float(np.linalg.norm(self.vertices - c, axis=1).max())

    def to_mesh(self) -> TriMesh:
        return TriMesh(self.vertices, self.faces)

    def transformed(self, pose) -> "ConvexPart":
        """Rigidly transform the part (normals rotate, plane offsets shift)."""
        verts = pose.apply_points(self.vertices)
        rot = pose.rotation_matrix()
        normals = self.planes[:, :3] @ rot.T
        offsets = self.planes[:, 3] - normals @ pose.position
        return ConvexPart(verts, self.faces, np.column_stack([normals, offsets]), self.concavity)


def _voxel_concavity(surface_pts: np.ndarray, part_count: int, grid: VoxelGrid):
    """(concavity, hull) of a candidate part measured by voxel counting.

    The hull volume is counted by rasterizing the hull mesh on the object's
    own voxel grid, which keeps the two counts commensurate.
    """
    hull = ConvexPart.from_points(surface_pts)
    hull_grid = voxelize_on_grid(hull.to_mesh(), grid.origin, grid.spacing, grid.shape)
    hull_count = hull_grid.count()
    if hull_count <= 0:
        return 0.0, hull
    concavity = max(0.0, (hull_count - part_count) / hull_count)
    return concavity, hull


def decompose_convex(
    mesh: TriMesh,
    concavity_tol: float = 0.05,
    resolution: int = 64,
    seed: int = 0,
) -> list[ConvexPart]:
    """Split a mesh into convex parts with voxel-counted concavity <= tol."""
    mesh.require_nonempty()
    grid = voxelize_resolution(mesh, resolution)
    solid = grid.centers()
    if len(solid) < 1:
        raise NonVoxelizable("no interior voxels at this resolution")
    surface = np.vstack(
        [mesh.vertices, sample_surface(mesh, _SURFACE_SAMPLES, np.random.default_rng([seed, 0xACD]))]
    )

    parts: list[ConvexPart] = []
    stack: list[tuple[np.ndarray, np.ndarray, int]] = [
        (solid, surface, 0)
    ]
    while stack:
        centers, pts, depth = stack.pop()
        concavity, hull = _voxel_concavity(pts, len(centers), grid)
        if (
            concavity <= concavity_tol
            or depth >= _MAX_DEPTH
            or len(centers) < _MIN_VOXELS
            or len(pts) < _MIN_POINTS
        ):
            parts.append(ConvexPart(hull.vertices, hull.faces, hull.planes, concavity))
            continue
        mean = centers.mean(axis=0)
        cov = np.cov((centers - mean).T)
        eigval, eigvec = np.linalg.eigh(cov)
        axis = eigvec[:, int(np.argmax(eigval))]
        proj_c = (centers - mean) @ axis
        cut = float(np.median(proj_c))
        left_c = centers[proj_c <= cut]
        right_c = centers[proj_c > cut]
        proj_p = (pts - mean) @ axis
        band = grid.spacing  # points near the cut go to both sides
        left_p = pts[proj_p <= cut + band]
        right_p = pts[proj_p > cut - band]
        if len(left_c) == 0 or len(right_c) == 0 or len(left_p) < 4 or len(right_p) < 4:
            parts.append(ConvexPart(hull.vertices, hull.faces, hull.planes, concavity))
            continue
        stack.append((right_c, right_p, depth + 1))
        stack.append((left_c, left_p, depth + 1))
    return parts


def convex_hull_part(mesh: TriMesh) -> ConvexPart:
    """Single convex hull of a mesh (obstacle geometry shortcut)."""
    mesh.require_nonempty()
    return ConvexPart.from_points(mesh.vertices)
