"""Quasi-static contact simulation: scenes, proximity queries, grasp execution."""

from ..contacts import ContactPoint
from .contact import CONTACT_TOL, min_separation, object_contacts, world_contacts
from .grasp import (
    APPROACH_STEP,
    BACKOFF_MARGIN,
    CLOSE_STEP,
    GraspOutcome,
    GraspState,
    approach_until_contact,
    close_fingers,
    simulate_grasp,
)
from .hold import hold_test
from .scene import PhysicsParams, Scene, build_scene, load_scene_file, resting_pose

__all__ = [
    "CONTACT_TOL",
    "ContactPoint",
    "min_separation",
    "object_contacts",
    "world_contacts",
    "APPROACH_STEP",
    "BACKOFF_MARGIN",
    "CLOSE_STEP",
    "GraspOutcome",
    "GraspState",
    "approach_until_contact",
    "close_fingers",
    "simulate_grasp",
    "hold_test",
    "PhysicsParams",
    "Scene",
    "build_scene",
    "load_scene_file",
    "resting_pose",
]
