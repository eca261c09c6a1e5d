"""Exception types raised by the engine.

Simulation failures (no contact, obstacle hit) are *statuses* on results,
not exceptions: batch evaluation must keep going. Exceptions here are
contract violations on inputs.
"""


class HemigraspError(Exception):
    """Base class for all engine errors."""


class EmptyMesh(HemigraspError):
    """Mesh has no vertices or faces."""


class InvalidTarget(HemigraspError):
    """Decimation target below the minimum closed-surface face count."""


class NonVoxelizable(HemigraspError):
    """Geometry has no volume to voxelize (zero extent along an axis)."""


class NonWatertight(HemigraspError):
    """Operation requires a closed 2-manifold mesh."""


class DegenerateObject(HemigraspError):
    """Object has zero bounding extent."""


class BelowEquator(HemigraspError):
    """Direction points under the hemisphere base plane."""


class UserPoseOffSphere(HemigraspError):
    """User pose is not on the hemisphere surface."""


class SchemaError(HemigraspError):
    """Structured-text config does not satisfy its schema."""


class FlexionOutOfRange(HemigraspError):
    """Finger flexion outside [0, 1]."""


class InvalidConeCount(HemigraspError):
    """Friction cone discretization needs at least 3 edges."""


class WrongPhase(HemigraspError):
    """Input applied in a session phase that does not accept it."""


class IllegalTransition(HemigraspError):
    """Event not defined for the current session phase."""


class MissingPlan(HemigraspError):
    """Guidance requested before a plan result is available."""
