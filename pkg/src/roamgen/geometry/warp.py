"""Depth-based forward reprojection with a nearest-depth z-buffer.

Each valid source pixel is unprojected with its depth, moved by the
relative pose, projected through the intrinsics, and splatted with a
1-pixel footprint; the nearest depth wins a target pixel. The mask marks
covered target pixels, which is what separates dark texture from regions
the source simply cannot see.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from roamgen import kernels
from roamgen.geometry.camera import DepthMap, Intrinsics
from roamgen.geometry.pose import Pose


@dataclass(frozen=True)
class WarpResult:
    """Warped frame, coverage mask, and the z-buffer depths behind it."""

    frame: np.ndarray
    mask: np.ndarray
    depth: np.ndarray

    def __post_init__(self):
        if self.frame.shape[:2] != self.mask.shape or self.mask.shape != self.depth.shape:
            raise ValueError("frame/mask/depth raster shapes disagree")

    @property
    def coverage(self) -> float:
        return float(self.mask.mean())


def reproject(ref: np.ndarray, ref_depth: DepthMap, k: Intrinsics, rel: Pose) -> WarpResult:
    """Warp ref into the view displaced by rel (target-from-source)."""
    ref = np.ascontiguousarray(ref, dtype=np.float32)
    if ref.ndim != 3:
        raise ValueError("ref must be an HxWxC raster")
    if ref.shape[:2] != ref_depth.shape or ref.shape[:2] != (k.height, k.width):
        raise ValueError("ref, ref_depth and intrinsics dimensions disagree")
    if not (np.all(np.isfinite(rel.rotation)) and np.all(np.isfinite(rel.translation))):
        raise ValueError("relative pose has non-finite entries")

    frame, depth, mask = kernels.forward_warp(
        ref,
        np.ascontiguousarray(ref_depth.values, dtype=np.float32),
        np.ascontiguousarray(ref_depth.valid, dtype=np.uint8),
        k.fx, k.fy, k.cx, k.cy,
        np.ascontiguousarray(rel.rotation),
        np.ascontiguousarray(rel.translation),
    )
    return WarpResult(frame=frame, mask=mask, depth=depth)


def splat_world_points(points: np.ndarray, colors: np.ndarray,
                       cam_from_world: Pose, k: Intrinsics) -> WarpResult:
    """Splat world-frame points into a camera view (same z-buffer rules)."""
    pts_cam = cam_from_world.apply(points) if points.size else points.reshape(0, 3)
    frame, depth, mask = kernels.splat_points(
        np.ascontiguousarray(pts_cam, dtype=np.float64),
        np.ascontiguousarray(colors, dtype=np.float32),
        k.fx, k.fy, k.cx, k.cy, k.height, k.width,
    )
    return WarpResult(frame=frame, mask=mask, depth=depth)


def merge_warps(primary: WarpResult, extra: WarpResult) -> WarpResult:
    """Union two warps under one z-buffer; the primary wins depth ties."""
    take = extra.mask & (~primary.mask | (extra.depth < primary.depth))
    frame = np.where(take[..., None], extra.frame, primary.frame)
    depth = np.where(take, extra.depth, primary.depth)
    mask = primary.mask | extra.mask
    return WarpResult(frame=frame, mask=mask, depth=depth)
