"""Oracle renderer: exact per-pixel ray casting of a SceneSpec."""

from __future__ import annotations

import numpy as np

from roamgen import kernels
from roamgen.geometry import DepthMap, Intrinsics, Pose
from roamgen.microworld.scene import GROUND_Y, SceneSpec


def render(scene: SceneSpec, pose: Pose, k: Intrinsics, t: int = 0):
    """Ray-cast the scene from a camera-to-world pose at frame index t.

    Returns (frame, DepthMap): frame is (H, W, 3) float32 in [0, 1]; depth
    holds the hit distance along the camera z axis, invalid where the ray
    escapes to the sky.
    """
    if t < 0:
        raise ValueError("frame index must be >= 0")
    frame, depth, hit = kernels.render_scene(
        k.height, k.width, k.fx, k.fy, k.cx, k.cy,
        np.ascontiguousarray(pose.rotation),
        np.ascontiguousarray(pose.translation),
        GROUND_Y, scene.checker_period,
        np.asarray(scene.color_a, dtype=np.float64),
        np.asarray(scene.color_b, dtype=np.float64),
        np.ascontiguousarray(scene.boxes_array()),
        np.ascontiguousarray(scene.mover_center_at(t)),
        scene.mover.radius,
        np.asarray(scene.mover.color, dtype=np.float64),
        np.ascontiguousarray(scene.sky_color),
    )
    return frame, DepthMap(values=depth, valid=hit)
