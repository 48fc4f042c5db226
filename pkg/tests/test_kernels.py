"""Compiled-vs-fallback kernel equivalence."""

from __future__ import annotations

import numpy as np
import pytest

from roamgen import kernels
from conftest import random_pose

cython_impl = pytest.importorskip(
    "roamgen.kernels._impl_cython", reason="compiled kernel core not built")
numpy_impl = kernels.load_impl("numpy")


def _warp_inputs(seed, h=40, w=48):
    rng = np.random.default_rng(seed)
    frame = rng.random((h, w, 3)).astype(np.float32)
    depth = (0.5 + 4.0 * rng.random((h, w))).astype(np.float32)
    valid = (rng.random((h, w)) > 0.25).astype(np.uint8)
    pose = random_pose(rng, tscale=0.4)
    k = dict(fx=0.9 * w, fy=0.9 * w, cx=(w - 1) / 2.0, cy=(h - 1) / 2.0)
    return frame, depth, valid, pose, k


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_forward_warp_backends_agree(seed):
    frame, depth, valid, pose, k = _warp_inputs(seed)
    args = (frame, depth, valid, k["fx"], k["fy"], k["cx"], k["cy"],
            np.ascontiguousarray(pose.rotation), np.ascontiguousarray(pose.translation))
    cf, cd, cm = cython_impl.forward_warp(*args)
    nf, nd, nm = numpy_impl.forward_warp(*args)
    np.testing.assert_array_equal(cm, nm)
    np.testing.assert_array_equal(cd, nd)
    np.testing.assert_array_equal(cf, nf)


@pytest.mark.parametrize("seed", [5, 6])
def test_splat_points_backends_agree(seed):
    rng = np.random.default_rng(seed)
    xyz = rng.normal(size=(500, 3)) * np.array([1.0, 1.0, 2.0]) + np.array([0, 0, 3.0])
    colors = rng.random((500, 3)).astype(np.float32)
    args = (np.ascontiguousarray(xyz), colors, 30.0, 30.0, 15.5, 15.5, 32, 32)
    cf, cd, cm = cython_impl.splat_points(*args)
    nf, nd, nm = numpy_impl.splat_points(*args)
    np.testing.assert_array_equal(cm, nm)
    np.testing.assert_array_equal(cd, nd)
    np.testing.assert_array_equal(cf, nf)


@pytest.mark.parametrize("seed", [7, 8])
def test_render_backends_agree(seed):
    rng = np.random.default_rng(seed)
    pose = random_pose(rng, tscale=0.5)
    boxes = np.concatenate([
        rng.uniform(-2, 2, size=(3, 3)) + np.array([0, 0.8, 4.0]),
        rng.uniform(0.2, 0.7, size=(3, 3)),
        rng.random((3, 3)),
    ], axis=1)
    args = (48, 48, 40.0, 40.0, 23.5, 23.5,
            np.ascontiguousarray(pose.rotation), np.ascontiguousarray(pose.translation),
            1.5, 0.75, np.array([0.9, 0.85, 0.8]), np.array([0.2, 0.25, 0.3]),
            np.ascontiguousarray(boxes),
            np.array([0.5, 0.9, 3.0]), 0.4, np.array([1.0, 0.4, 0.1]),
            np.array([0.55, 0.7, 0.95]))
    cf, cd, cm = cython_impl.render_scene(*args)
    nf, nd, nm = numpy_impl.render_scene(*args)
    np.testing.assert_array_equal(cm, nm)
    np.testing.assert_array_equal(cd, nd)
    np.testing.assert_array_equal(cf, nf)
