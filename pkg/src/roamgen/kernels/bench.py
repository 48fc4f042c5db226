"""Benchmark the compiled kernel core against the NumPy fallback.

Reports per-call times for the
forward-splat warp and the scene ray-caster at several raster sizes, plus
the speedup, after asserting both backends agree bit-for-bit on the
benchmark inputs.
"""

from __future__ import annotations

import time

import numpy as np


def _inputs(size: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    frame = rng.random((size, size, 3)).astype(np.float32)
    depth = (0.5 + 4.0 * rng.random((size, size))).astype(np.float32)
    valid = (rng.random((size, size)) > 0.2).astype(np.uint8)
    rot = np.eye(3)
    trans = np.array([0.2, -0.1, 0.15])
    boxes = np.concatenate([
        rng.uniform(-2, 2, size=(4, 3)) + np.array([0, 0.8, 4.0]),
        rng.uniform(0.2, 0.7, size=(4, 3)),
        rng.random((4, 3)),
    ], axis=1)
    scene = dict(ground_y=1.5, checker_period=1.4,
                 ground_col_a=np.array([0.8, 0.8, 0.75]),
                 ground_col_b=np.array([0.5, 0.5, 0.55]),
                 boxes=np.ascontiguousarray(boxes),
                 mover_center=np.array([0.3, 1.0, 4.0]), mover_radius=0.4,
                 mover_color=np.array([0.9, 0.5, 0.2]),
                 sky=np.array([0.65, 0.65, 0.65]))
    return frame, depth, valid, rot, trans, scene


def _time(fn, repeats: int) -> float:
    fn()  # warm-up
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats


def run_benchmarks(sizes=(64, 128, 256), repeats: int = 5) -> list:
    from roamgen.kernels import load_impl

    impls = {}
    for name in ("cython", "numpy"):
        try:
            impls[name] = load_impl(name)
        except ImportError:
            print(f"[bench] {name} backend unavailable, skipping")
    rows = []
    for size in sizes:
        frame, depth, valid, rot, trans, scene = _inputs(size)
        fx = 0.9 * size
        cx = (size - 1) / 2.0
        results = {}
        for name, impl in impls.items():
            warp = lambda: impl.forward_warp(frame, depth, valid, fx, fx, cx, cx,
                                             rot, trans)
            render = lambda: impl.render_scene(
                size, size, fx, fx, cx, cx, rot, trans,
                scene["ground_y"], scene["checker_period"],
                scene["ground_col_a"], scene["ground_col_b"], scene["boxes"],
                scene["mover_center"], scene["mover_radius"],
                scene["mover_color"], scene["sky"])
            results[name] = {"warp": _time(warp, repeats),
                             "render": _time(render, repeats),
                             "outputs": (warp(), render())}
        if len(results) == 2:
            for (cf, cd, cm), (nf, nd, nm) in [
                    (results["cython"]["outputs"][0], results["numpy"]["outputs"][0]),
                    (results["cython"]["outputs"][1], results["numpy"]["outputs"][1])]:
                assert np.array_equal(cf, nf) and np.array_equal(cd, nd) \
                    and np.array_equal(cm, nm), "backend outputs diverge"
        for op in ("warp", "render"):
            row = {"size": size, "op": op}
            for name in impls:
                row[name] = results[name][op]
            if "cython" in row and "numpy" in row:
                row["speedup"] = row["numpy"] / row["cython"]
            rows.append(row)

    print(f"{'size':>6} {'op':>8} {'cython':>12} {'numpy':>12} {'speedup':>9}")
    for row in rows:
        cy = f"{row['cython'] * 1e3:9.3f} ms" if "cython" in row else "        -"
        np_ = f"{row['numpy'] * 1e3:9.3f} ms" if "numpy" in row else "        -"
        sp = f"{row.get('speedup', float('nan')):8.1f}x"
        print(f"{row['size']:>6} {row['op']:>8} {cy:>12} {np_:>12} {sp:>9}")
    return rows


if __name__ == "__main__":
    run_benchmarks()
