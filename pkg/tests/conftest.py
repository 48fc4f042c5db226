"""Shared test helpers: seeded random poses and brute-force raster oracles."""

from __future__ import annotations

import numpy as np
import pytest
import torch

from roamgen.geometry import DepthMap, Intrinsics, Pose


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform-ish random rotation from a normalized random quaternion."""
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def random_pose(rng: np.random.Generator, tscale: float = 1.0) -> Pose:
    return Pose(random_rotation(rng), rng.normal(scale=tscale, size=3))


def brute_force_warp(ref, depth_map: DepthMap, k: Intrinsics, rel: Pose):
    """All-pairs reference splat: plain loops, strict-< z-buffer.

    Independent of roamgen.kernels; used as the oracle for reproject.
    """
    h, w = depth_map.shape
    c = ref.shape[2]
    out = np.zeros((h, w, c), dtype=np.float32)
    zbuf = np.full((h, w), np.inf)
    mask = np.zeros((h, w), dtype=bool)
    for v in range(h):
        for u in range(w):
            if not depth_map.valid[v, u]:
                continue
            d = float(depth_map.values[v, u])
            p = np.array([(u - k.cx) / k.fx * d, (v - k.cy) / k.fy * d, d])
            q = rel.rotation @ p + rel.translation
            if q[2] <= 0:
                continue
            u2 = int(np.rint(k.fx * q[0] / q[2] + k.cx))
            v2 = int(np.rint(k.fy * q[1] / q[2] + k.cy))
            if not (0 <= u2 < w and 0 <= v2 < h):
                continue
            if q[2] < zbuf[v2, u2]:
                zbuf[v2, u2] = q[2]
                mask[v2, u2] = True
                out[v2, u2] = ref[v, u]
    depth = np.where(mask, zbuf, 0.0).astype(np.float32)
    return out, depth, mask


@pytest.fixture(autouse=True)
def _single_thread_torch():
    torch.set_num_threads(1)
