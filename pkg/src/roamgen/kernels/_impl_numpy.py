"""Pure-NumPy kernel implementations.

These mirror the Cython kernels operation-for-operation (same expression
trees, same iteration/tie-break order, same float64 intermediates cast to
float32 at the store) so the two backends are interchangeable bit-for-bit.
Winner selection for the z-buffer splats reproduces the scalar loop's
strict `<` test: minimum depth wins, earliest candidate in row-major order
wins ties.
"""

from __future__ import annotations

import numpy as np

IMPL = "numpy"

_EPS = 1e-6
_SOFT = 1.5


def _zbuffer_commit(tidx, pz, colors, out_frame, out_depth, out_mask):
    """Resolve splat candidates against a z-buffer and write the winners.

    tidx: flat target pixel index per candidate, in source iteration order.
    """
    if tidx.size == 0:
        return
    order = np.arange(tidx.size)
    ranked = np.lexsort((order, pz, tidx))
    tsorted = tidx[ranked]
    first = np.ones(tsorted.size, dtype=bool)
    first[1:] = tsorted[1:] != tsorted[:-1]
    win = ranked[first]

    h, w = out_mask.shape
    vy, vx = np.divmod(tidx[win], w)
    out_mask[vy, vx] = True
    out_depth[vy, vx] = pz[win].astype(np.float32)
    out_frame[vy, vx] = colors[win]


def forward_warp(frame, depth, valid, fx, fy, cx, cy, rot, trans):
    """Splat every valid source pixel into the target view.

    frame: (H, W, C) float32; depth/valid: (H, W); rot/trans: the rigid
    transform taking source-camera points to target-camera points.
    Returns (out_frame, out_depth, out_mask); uncovered pixels are zero.
    """
    h, w, c = frame.shape
    out_frame = np.zeros((h, w, c), dtype=np.float32)
    out_depth = np.zeros((h, w), dtype=np.float32)
    out_mask = np.zeros((h, w), dtype=bool)

    vv, uu = np.nonzero(valid)
    if vv.size == 0:
        return out_frame, out_depth, out_mask
    d = depth[vv, uu].astype(np.float64)

    x = (uu - cx) / fx * d
    y = (vv - cy) / fy * d
    z = d
    px = rot[0, 0] * x + rot[0, 1] * y + rot[0, 2] * z + trans[0]
    py = rot[1, 0] * x + rot[1, 1] * y + rot[1, 2] * z + trans[1]
    pz = rot[2, 0] * x + rot[2, 1] * y + rot[2, 2] * z + trans[2]

    keep = pz > 0.0
    u2 = np.rint(fx * px[keep] / pz[keep] + cx)
    v2 = np.rint(fy * py[keep] / pz[keep] + cy)
    inb = (u2 >= 0) & (u2 < w) & (v2 >= 0) & (v2 < h)

    src_v = vv[keep][inb]
    src_u = uu[keep][inb]
    tidx = v2[inb].astype(np.int64) * w + u2[inb].astype(np.int64)
    _zbuffer_commit(tidx, pz[keep][inb], frame[src_v, src_u],
                    out_frame, out_depth, out_mask)
    return out_frame, out_depth, out_mask


def splat_points(xyz, colors, fx, fy, cx, cy, height, width):
    """Splat camera-frame points (N, 3) with colors (N, C) into a raster."""
    n, c = colors.shape
    out_frame = np.zeros((height, width, c), dtype=np.float32)
    out_depth = np.zeros((height, width), dtype=np.float32)
    out_mask = np.zeros((height, width), dtype=bool)
    if n == 0:
        return out_frame, out_depth, out_mask

    px = xyz[:, 0].astype(np.float64)
    py = xyz[:, 1].astype(np.float64)
    pz = xyz[:, 2].astype(np.float64)
    keep = pz > 0.0
    u2 = np.rint(fx * px[keep] / pz[keep] + cx)
    v2 = np.rint(fy * py[keep] / pz[keep] + cy)
    inb = (u2 >= 0) & (u2 < width) & (v2 >= 0) & (v2 < height)

    tidx = v2[inb].astype(np.int64) * width + u2[inb].astype(np.int64)
    _zbuffer_commit(tidx, pz[keep][inb], colors[keep][inb],
                    out_frame, out_depth, out_mask)
    return out_frame, out_depth, out_mask


def _parity_integral(u):
    """Antiderivative of the unit-cell parity wave c(u) = floor(u) mod 2."""
    k = np.floor(u)
    odd = k - 2.0 * np.floor(k * 0.5)
    return np.floor(k * 0.5) + (u - k) * odd


def _filtered_parity(u, w):
    """Mean parity over the window [u - w/2, u + w/2] (cell units)."""
    return (_parity_integral(u + 0.5 * w) - _parity_integral(u - 0.5 * w)) / w


def _trace(us, vs, fx, fy, cx, cy, rot, trans,
           ground_y, checker_period, ground_col_a, ground_col_b,
           boxes, mover_center, mover_radius, mover_color, sky):
    """Cast one ray per (us, vs) pixel-plane coordinate.

    Returns (hit parameter with inf misses, shaded color). Colors use a
    box-filtered checker on the ground (mean parity over the pixel's
    first-order footprint, widened by _SOFT) so edges antialias and the
    texture converges to its mean at grazing angles.
    """
    dx = (us - cx) / fx
    dy = (vs - cy) / fy
    dwx = rot[0, 0] * dx + rot[0, 1] * dy + rot[0, 2]
    dwy = rot[1, 0] * dx + rot[1, 1] * dy + rot[1, 2]
    dwz = rot[2, 0] * dx + rot[2, 1] * dy + rot[2, 2]
    ox, oy, oz = trans[0], trans[1], trans[2]

    shape = dx.shape
    best = np.full(shape, np.inf)
    color = np.empty(shape + (3,), dtype=np.float64)
    color[:] = sky
    shade = np.ones(shape, dtype=np.float64)

    with np.errstate(divide="ignore", invalid="ignore"):
        sg = (ground_y - oy) / dwy
    hit_g = (np.abs(dwy) > 1e-12) & (sg > _EPS) & (sg < best)
    if hit_g.any():
        wx = ox + sg * dwx
        wz = oz + sg * dwz
        with np.errstate(divide="ignore", invalid="ignore"):
            rx = dwx / dwy
            rz = dwz / dwy
            fww = np.abs(sg / fx * (rot[0, 0] - rot[1, 0] * rx)) \
                + np.abs(sg / fy * (rot[0, 1] - rot[1, 1] * rx))
            fwz = np.abs(sg / fx * (rot[2, 0] - rot[1, 0] * rz)) \
                + np.abs(sg / fy * (rot[2, 1] - rot[1, 1] * rz))
        mx = _filtered_parity(wx / checker_period,
                              np.maximum(fww * _SOFT / checker_period, 1e-9))
        mz = _filtered_parity(wz / checker_period,
                              np.maximum(fwz * _SOFT / checker_period, 1e-9))
        par = mx + mz - 2.0 * mx * mz
        gcol = (np.asarray(ground_col_a)
                + (np.asarray(ground_col_b) - np.asarray(ground_col_a)) * par[..., None])
        best = np.where(hit_g, sg, best)
        color = np.where(hit_g[..., None], gcol, color)
        shade = np.where(hit_g, 1.0, shade)

    axis_shade = np.array([0.92, 1.0, 0.84])
    origin = np.array([ox, oy, oz])
    dirs = np.stack([dwx, dwy, dwz], axis=-1)
    for b in range(boxes.shape[0]):
        centre = boxes[b, 0:3]
        half = boxes[b, 3:6]
        bcol = boxes[b, 6:9]
        lo = centre - half
        hi = centre + half
        tmin = np.full(shape, -np.inf)
        tmax = np.full(shape, np.inf)
        axis = np.zeros(shape, dtype=np.int64)
        miss = np.zeros(shape, dtype=bool)
        for a in range(3):
            da = dirs[..., a]
            para = np.abs(da) < 1e-12
            miss |= para & ((origin[a] < lo[a]) | (origin[a] > hi[a]))
            with np.errstate(divide="ignore", invalid="ignore"):
                t1 = (lo[a] - origin[a]) / da
                t2 = (hi[a] - origin[a]) / da
            near = np.where(para, -np.inf, np.minimum(t1, t2))
            far = np.where(para, np.inf, np.maximum(t1, t2))
            take = near > tmin
            axis = np.where(take, a, axis)
            tmin = np.where(take, near, tmin)
            tmax = np.minimum(tmax, far)
        hit_b = ~miss & (tmax >= tmin) & (tmin > _EPS) & (tmin < best)
        if hit_b.any():
            fac = axis_shade[axis]
            best = np.where(hit_b, tmin, best)
            color = np.where(hit_b[..., None], bcol, color)
            shade = np.where(hit_b, fac, shade)

    if mover_radius > 0.0:
        ocx = ox - mover_center[0]
        ocy = oy - mover_center[1]
        ocz = oz - mover_center[2]
        qa = dwx * dwx + dwy * dwy + dwz * dwz
        qb = 2.0 * (ocx * dwx + ocy * dwy + ocz * dwz)
        qc = ocx * ocx + ocy * ocy + ocz * ocz - mover_radius * mover_radius
        disc = qb * qb - 4.0 * qa * qc
        ok = disc >= 0.0
        root = np.sqrt(np.where(ok, disc, 0.0))
        sm = (-qb - root) / (2.0 * qa)
        hit_m = ok & (sm > _EPS) & (sm < best)
        if hit_m.any():
            best = np.where(hit_m, sm, best)
            color = np.where(hit_m[..., None], mover_color, color)
            shade = np.where(hit_m, 1.0, shade)

    return best, color * shade[..., None]


def render_scene(height, width, fx, fy, cx, cy, rot, trans,
                 ground_y, checker_period, ground_col_a, ground_col_b,
                 boxes, mover_center, mover_radius, mover_color, sky):
    """Ray-cast the procedural scene: checker ground plane, AABBs, one sphere.

    rot/trans are camera-to-world. Color is 2x2 supersampled (quarter-pixel
    subrays averaged in fixed order); depth comes from the exact center ray
    and is the distance along the camera z axis. No-hit pixels get the sky
    color, depth 0 and hit=False.
    """
    scene_args = (fx, fy, cx, cy, rot, trans, ground_y, checker_period,
                  ground_col_a, ground_col_b, boxes, mover_center,
                  mover_radius, mover_color, sky)

    # Color pass: subray grid at u + a/2 - 1/4, a in {0, 1}.
    us2 = np.arange(2 * width, dtype=np.float64)[None, :] * 0.5 - 0.25
    vs2 = np.arange(2 * height, dtype=np.float64)[:, None] * 0.5 - 0.25
    _, col2 = _trace(np.broadcast_to(us2, (2 * height, 2 * width)),
                     np.broadcast_to(vs2, (2 * height, 2 * width)), *scene_args)
    c = col2.reshape(height, 2, width, 2, 3)
    frame = ((c[:, 0, :, 0] + c[:, 0, :, 1] + c[:, 1, :, 0] + c[:, 1, :, 1]) * 0.25)

    # Depth pass: exact center rays.
    us = np.arange(width, dtype=np.float64)[None, :]
    vs = np.arange(height, dtype=np.float64)[:, None]
    best, _ = _trace(np.broadcast_to(us, (height, width)),
                     np.broadcast_to(vs, (height, width)), *scene_args)

    hit = np.isfinite(best)
    depth = np.where(hit, best, 0.0).astype(np.float32)
    return frame.astype(np.float32), depth, hit
