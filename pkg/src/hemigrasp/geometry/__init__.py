"""Geometry core: meshes, poses, hemisphere constraints, conditioning, metrics."""

from .convex import ConvexPart, convex_hull_part, decompose_convex
from .hemisphere import (
    DEFAULT_CLEARANCE,
    POWER_RISE,
    HemisphereSpec,
    hemisphere_for,
    roll_of,
    surface_pose,
    tangent_basis,
)
from .mesh import TriMesh, load_mesh, load_obj, load_stl, save_obj, save_stl
from .perturb import perturb_mesh
from .pose import Pose
from .qem import decimate_qem
from .shape_metrics import chamfer_l1, point_mesh_distance, sample_surface, volumetric_iou
from .voxel import VoxelGrid, voxelize, voxelize_resolution

__all__ = [
    "ConvexPart",
    "convex_hull_part",
    "decompose_convex",
    "DEFAULT_CLEARANCE",
    "POWER_RISE",
    "HemisphereSpec",
    "hemisphere_for",
    "roll_of",
    "surface_pose",
    "tangent_basis",
    "TriMesh",
    "load_mesh",
    "load_obj",
    "load_stl",
    "save_obj",
    "save_stl",
    "perturb_mesh",
    "Pose",
    "decimate_qem",
    "chamfer_l1",
    "point_mesh_distance",
    "sample_surface",
    "volumetric_iou",
    "VoxelGrid",
    "voxelize",
    "voxelize_resolution",
]
