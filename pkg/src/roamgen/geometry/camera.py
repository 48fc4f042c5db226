"""Pinhole camera model: intrinsics, depth rasters, unprojection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from roamgen.geometry.pose import Pose


@dataclass(frozen=True)
class Intrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")

    @staticmethod
    def default(width: int, height: int, fov_deg: float = 60.0) -> "Intrinsics":
        """Square-pixel intrinsics from a horizontal field of view."""
        f = width / (2.0 * np.tan(np.radians(fov_deg) / 2.0))
        return Intrinsics(f, f, (width - 1) / 2.0, (height - 1) / 2.0, width, height)

    def to_dict(self) -> dict:
        return {"fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy,
                "width": self.width, "height": self.height}

    @staticmethod
    def from_dict(d: dict) -> "Intrinsics":
        return Intrinsics(d["fx"], d["fy"], d["cx"], d["cy"], d["width"], d["height"])


@dataclass(frozen=True)
class DepthMap:
    """Per-pixel depth along the camera z axis; valid marks usable pixels."""

    values: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        valid = np.asarray(self.valid, dtype=bool)
        if values.shape != valid.shape or values.ndim != 2:
            raise ValueError("values and valid must share an HxW shape")
        if np.any(values[valid] <= 0) or not np.all(np.isfinite(values[valid])):
            raise ValueError("valid depths must be finite and > 0")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "valid", valid)

    @property
    def shape(self):
        return self.values.shape


def unproject(ref_depth: DepthMap, k: Intrinsics, world_from_cam: Pose,
              frame: np.ndarray | None = None):
    """Lift valid depth pixels to world-frame points.

    Returns (points, colors): points is (N, 3); colors is (N, C) taken from
    frame, or zeros (N, 3) when no frame is supplied.
    """
    if ref_depth.shape != (k.height, k.width):
        raise ValueError("depth raster does not match intrinsics")
    vv, uu = np.nonzero(ref_depth.valid)
    d = ref_depth.values[vv, uu].astype(np.float64)
    pts_cam = np.stack([(uu - k.cx) / k.fx * d, (vv - k.cy) / k.fy * d, d], axis=-1)
    points = world_from_cam.apply(pts_cam)
    if frame is not None:
        if frame.shape[:2] != ref_depth.shape:
            raise ValueError("frame raster does not match depth raster")
        colors = np.asarray(frame, dtype=np.float32)[vv, uu]
    else:
        colors = np.zeros((points.shape[0], 3), dtype=np.float32)
    return points, colors
