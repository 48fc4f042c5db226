"""Camera geometry: SE(3) poses, interaction commands, projection, warping.

Convention, used everywhere in the package: right-handed camera frame with
+x right, +y down, +z forward; pixel (0, 0) is the top-left corner; poses
are camera-to-world unless a name says otherwise.
"""

from roamgen.geometry.pose import (
    CommandKind,
    InteractionCommand,
    Pose,
    StepConfig,
    accumulate,
    command_to_delta,
    compose,
    quaternion_to_rotation,
    rotation_to_quaternion,
)
from roamgen.geometry.camera import DepthMap, Intrinsics, unproject
from roamgen.geometry.warp import WarpResult, reproject
from roamgen.geometry.metrics import trajectory_error

__all__ = [
    "Pose",
    "Intrinsics",
    "DepthMap",
    "InteractionCommand",
    "CommandKind",
    "StepConfig",
    "WarpResult",
    "compose",
    "accumulate",
    "command_to_delta",
    "reproject",
    "unproject",
    "trajectory_error",
    "quaternion_to_rotation",
    "rotation_to_quaternion",
]
