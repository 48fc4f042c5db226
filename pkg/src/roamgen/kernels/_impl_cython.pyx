# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel implementations.

Scalar twins of ``_impl_numpy``: identical expression trees, float64
intermediates, float32 stores, and the same strict-< z-buffer tie-break
(first candidate in row-major order wins equal depths).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor, fabs, rint, sqrt, INFINITY

cnp.import_array()

IMPL = "cython"

cdef double _EPS = 1e-6
cdef double _SOFT = 1.5


cdef inline double _parity_integral(double u) noexcept nogil:
    cdef double k = floor(u)
    cdef double odd = k - 2.0 * floor(k * 0.5)
    return floor(k * 0.5) + (u - k) * odd


cdef inline double _filtered_parity(double u, double w) noexcept nogil:
    return (_parity_integral(u + 0.5 * w) - _parity_integral(u - 0.5 * w)) / w


def forward_warp(cnp.float32_t[:, :, ::1] frame,
                 cnp.float32_t[:, ::1] depth,
                 cnp.uint8_t[:, ::1] valid,
                 double fx, double fy, double cx, double cy,
                 double[:, ::1] rot, double[::1] trans):
    cdef Py_ssize_t h = frame.shape[0]
    cdef Py_ssize_t w = frame.shape[1]
    cdef Py_ssize_t c = frame.shape[2]
    out_frame_arr = np.zeros((h, w, c), dtype=np.float32)
    zbuf_arr = np.full((h, w), np.inf, dtype=np.float64)
    out_mask_arr = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.float32_t[:, :, ::1] out_frame = out_frame_arr
    cdef double[:, ::1] zbuf = zbuf_arr
    cdef cnp.uint8_t[:, ::1] out_mask = out_mask_arr

    cdef Py_ssize_t u, v, u2, v2, k
    cdef double d, x, y, z, px, py, pz
    for v in range(h):
        for u in range(w):
            if not valid[v, u]:
                continue
            d = <double> depth[v, u]
            x = (u - cx) / fx * d
            y = (v - cy) / fy * d
            z = d
            px = rot[0, 0] * x + rot[0, 1] * y + rot[0, 2] * z + trans[0]
            py = rot[1, 0] * x + rot[1, 1] * y + rot[1, 2] * z + trans[1]
            pz = rot[2, 0] * x + rot[2, 1] * y + rot[2, 2] * z + trans[2]
            if pz <= 0.0:
                continue
            u2 = <Py_ssize_t> rint(fx * px / pz + cx)
            v2 = <Py_ssize_t> rint(fy * py / pz + cy)
            if u2 < 0 or u2 >= w or v2 < 0 or v2 >= h:
                continue
            if pz < zbuf[v2, u2]:
                zbuf[v2, u2] = pz
                out_mask[v2, u2] = 1
                for k in range(c):
                    out_frame[v2, u2, k] = frame[v, u, k]

    covered = out_mask_arr.astype(bool)
    out_depth = np.where(covered, zbuf_arr, 0.0).astype(np.float32)
    return out_frame_arr, out_depth, covered


def splat_points(double[:, ::1] xyz,
                 cnp.float32_t[:, ::1] colors,
                 double fx, double fy, double cx, double cy,
                 Py_ssize_t height, Py_ssize_t width):
    cdef Py_ssize_t n = xyz.shape[0]
    cdef Py_ssize_t c = colors.shape[1]
    out_frame_arr = np.zeros((height, width, c), dtype=np.float32)
    zbuf_arr = np.full((height, width), np.inf, dtype=np.float64)
    out_mask_arr = np.zeros((height, width), dtype=np.uint8)
    cdef cnp.float32_t[:, :, ::1] out_frame = out_frame_arr
    cdef double[:, ::1] zbuf = zbuf_arr
    cdef cnp.uint8_t[:, ::1] out_mask = out_mask_arr

    cdef Py_ssize_t i, k, u2, v2
    cdef double px, py, pz
    for i in range(n):
        px = xyz[i, 0]
        py = xyz[i, 1]
        pz = xyz[i, 2]
        if pz <= 0.0:
            continue
        u2 = <Py_ssize_t> rint(fx * px / pz + cx)
        v2 = <Py_ssize_t> rint(fy * py / pz + cy)
        if u2 < 0 or u2 >= width or v2 < 0 or v2 >= height:
            continue
        if pz < zbuf[v2, u2]:
            zbuf[v2, u2] = pz
            out_mask[v2, u2] = 1
            for k in range(c):
                out_frame[v2, u2, k] = colors[i, k]

    covered = out_mask_arr.astype(bool)
    out_depth = np.where(covered, zbuf_arr, 0.0).astype(np.float32)
    return out_frame_arr, out_depth, covered


cdef double _trace_one(double us, double vs,
                       double fx, double fy, double cx, double cy,
                       double[:, ::1] rot, double ox, double oy, double oz,
                       double ground_y, double checker_period,
                       double[::1] ground_col_a, double[::1] ground_col_b,
                       double[:, ::1] boxes,
                       double[::1] mover_center, double mover_radius,
                       double[::1] mover_color, double[::1] sky,
                       double* col) noexcept nogil:
    """Cast one ray through pixel-plane coordinate (us, vs).

    Returns the hit parameter (INFINITY on miss) and writes the shaded
    color into col[0..2]. Twin of the numpy _trace."""
    cdef double dx = (us - cx) / fx
    cdef double dy = (vs - cy) / fy
    cdef double dwx = rot[0, 0] * dx + rot[0, 1] * dy + rot[0, 2]
    cdef double dwy = rot[1, 0] * dx + rot[1, 1] * dy + rot[1, 2]
    cdef double dwz = rot[2, 0] * dx + rot[2, 1] * dy + rot[2, 2]

    cdef double best = INFINITY
    cdef double shade = 1.0
    cdef double sg, wx, wz, rx, rz, fww, fwz, mx, mz, par_f
    cdef double lo, hi, oa, da, t1, t2, near, far, tmin, tmax
    cdef double ocx, ocy, ocz, qa, qb, qc, disc, sm
    cdef Py_ssize_t b, a, axis
    cdef bint miss
    cdef double axis_shade_0 = 0.92
    cdef double axis_shade_1 = 1.0
    cdef double axis_shade_2 = 0.84

    col[0] = sky[0]
    col[1] = sky[1]
    col[2] = sky[2]

    if fabs(dwy) > 1e-12:
        sg = (ground_y - oy) / dwy
        if sg > _EPS and sg < best:
            wx = ox + sg * dwx
            wz = oz + sg * dwz
            rx = dwx / dwy
            rz = dwz / dwy
            fww = fabs(sg / fx * (rot[0, 0] - rot[1, 0] * rx)) \
                + fabs(sg / fy * (rot[0, 1] - rot[1, 1] * rx))
            fwz = fabs(sg / fx * (rot[2, 0] - rot[1, 0] * rz)) \
                + fabs(sg / fy * (rot[2, 1] - rot[1, 1] * rz))
            mx = _filtered_parity(wx / checker_period,
                                  max(fww * _SOFT / checker_period, 1e-9))
            mz = _filtered_parity(wz / checker_period,
                                  max(fwz * _SOFT / checker_period, 1e-9))
            par_f = mx + mz - 2.0 * mx * mz
            best = sg
            shade = 1.0
            col[0] = ground_col_a[0] + (ground_col_b[0] - ground_col_a[0]) * par_f
            col[1] = ground_col_a[1] + (ground_col_b[1] - ground_col_a[1]) * par_f
            col[2] = ground_col_a[2] + (ground_col_b[2] - ground_col_a[2]) * par_f

    for b in range(boxes.shape[0]):
        tmin = -INFINITY
        tmax = INFINITY
        axis = 0
        miss = 0
        for a in range(3):
            lo = boxes[b, a] - boxes[b, 3 + a]
            hi = boxes[b, a] + boxes[b, 3 + a]
            if a == 0:
                da = dwx
                oa = ox
            elif a == 1:
                da = dwy
                oa = oy
            else:
                da = dwz
                oa = oz
            if fabs(da) < 1e-12:
                if oa < lo or oa > hi:
                    miss = 1
                    break
                near = -INFINITY
                far = INFINITY
            else:
                t1 = (lo - oa) / da
                t2 = (hi - oa) / da
                near = t1 if t1 < t2 else t2
                far = t2 if t1 < t2 else t1
            if near > tmin:
                tmin = near
                axis = a
            if far < tmax:
                tmax = far
        if miss:
            continue
        if tmax >= tmin and tmin > _EPS and tmin < best:
            best = tmin
            col[0] = boxes[b, 6]
            col[1] = boxes[b, 7]
            col[2] = boxes[b, 8]
            if axis == 0:
                shade = axis_shade_0
            elif axis == 1:
                shade = axis_shade_1
            else:
                shade = axis_shade_2

    if mover_radius > 0.0:
        ocx = ox - mover_center[0]
        ocy = oy - mover_center[1]
        ocz = oz - mover_center[2]
        qa = dwx * dwx + dwy * dwy + dwz * dwz
        qb = 2.0 * (ocx * dwx + ocy * dwy + ocz * dwz)
        qc = ocx * ocx + ocy * ocy + ocz * ocz - mover_radius * mover_radius
        disc = qb * qb - 4.0 * qa * qc
        if disc >= 0.0:
            sm = (-qb - sqrt(disc)) / (2.0 * qa)
            if sm > _EPS and sm < best:
                best = sm
                col[0] = mover_color[0]
                col[1] = mover_color[1]
                col[2] = mover_color[2]
                shade = 1.0

    col[0] = col[0] * shade
    col[1] = col[1] * shade
    col[2] = col[2] * shade
    return best


def render_scene(Py_ssize_t height, Py_ssize_t width,
                 double fx, double fy, double cx, double cy,
                 double[:, ::1] rot, double[::1] trans,
                 double ground_y, double checker_period,
                 double[::1] ground_col_a, double[::1] ground_col_b,
                 double[:, ::1] boxes,
                 double[::1] mover_center, double mover_radius,
                 double[::1] mover_color, double[::1] sky):
    """Twin of the numpy render_scene: 2x2 supersampled color, exact
    center-ray depth along the camera z axis."""
    frame_arr = np.empty((height, width, 3), dtype=np.float32)
    depth_arr = np.zeros((height, width), dtype=np.float32)
    hit_arr = np.zeros((height, width), dtype=np.uint8)
    cdef cnp.float32_t[:, :, ::1] frame = frame_arr
    cdef cnp.float32_t[:, ::1] depth = depth_arr
    cdef cnp.uint8_t[:, ::1] hit = hit_arr

    cdef Py_ssize_t u, v, av, au
    cdef double best, us, vs
    cdef double col[3]
    cdef double acc0, acc1, acc2
    cdef double ox = trans[0]
    cdef double oy = trans[1]
    cdef double oz = trans[2]

    for v in range(height):
        for u in range(width):
            acc0 = 0.0
            acc1 = 0.0
            acc2 = 0.0
            for av in range(2):
                for au in range(2):
                    us = (<double> (2 * u + au)) * 0.5 - 0.25
                    vs = (<double> (2 * v + av)) * 0.5 - 0.25
                    _trace_one(us, vs, fx, fy, cx, cy, rot, ox, oy, oz,
                               ground_y, checker_period, ground_col_a,
                               ground_col_b, boxes, mover_center,
                               mover_radius, mover_color, sky, col)
                    acc0 = acc0 + col[0]
                    acc1 = acc1 + col[1]
                    acc2 = acc2 + col[2]
            frame[v, u, 0] = <cnp.float32_t> (acc0 * 0.25)
            frame[v, u, 1] = <cnp.float32_t> (acc1 * 0.25)
            frame[v, u, 2] = <cnp.float32_t> (acc2 * 0.25)

            best = _trace_one(<double> u, <double> v, fx, fy, cx, cy, rot,
                              ox, oy, oz, ground_y, checker_period,
                              ground_col_a, ground_col_b, boxes, mover_center,
                              mover_radius, mover_color, sky, col)
            if best < INFINITY:
                hit[v, u] = 1
                depth[v, u] = <cnp.float32_t> best

    return frame_arr, depth_arr, hit_arr.astype(bool)
