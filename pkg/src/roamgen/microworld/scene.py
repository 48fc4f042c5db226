"""Deterministic scene specifications.

World frame matches the camera convention (x right, y down, z forward);
the checkered ground plane sits at y = GROUND_Y below the spawn point at
the origin. Scene tags index the ground palette, so the tag-conditional
appearance distributions are genuinely different.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

GROUND_Y = 1.5

# (color_a, color_b) checker palettes; the scene tag picks one. Contrast is
# kept moderate so point-sampled edges stay benign under half-pixel warps.
PALETTES: Tuple[Tuple[Tuple[float, float, float], Tuple[float, float, float]], ...] = (
    ((0.82, 0.81, 0.78), (0.52, 0.53, 0.56)),
    ((0.88, 0.52, 0.42), (0.94, 0.78, 0.66)),
    ((0.44, 0.68, 0.48), (0.74, 0.88, 0.72)),
    ((0.48, 0.55, 0.82), (0.78, 0.82, 0.94)),
)
NUM_TAGS = len(PALETTES)


@dataclass(frozen=True)
class Box:
    center: Tuple[float, float, float]
    half: Tuple[float, float, float]
    color: Tuple[float, float, float]


@dataclass(frozen=True)
class Mover:
    center: Tuple[float, float, float]
    velocity: Tuple[float, float, float]
    radius: float
    color: Tuple[float, float, float]


@dataclass(frozen=True)
class SceneSpec:
    seed: int
    checker_period: float
    color_a: Tuple[float, float, float]
    color_b: Tuple[float, float, float]
    boxes: Tuple[Box, ...]
    mover: Mover
    scene_tag: int

    def boxes_array(self) -> np.ndarray:
        """Pack boxes as (n, 9): center, half extents, color."""
        if not self.boxes:
            return np.zeros((0, 9))
        return np.array([[*b.center, *b.half, *b.color] for b in self.boxes])

    @property
    def sky_color(self) -> np.ndarray:
        """Haze color: the checker mean, so the horizon blends seamlessly
        into the sky (the filtered checker converges to this at distance)."""
        return 0.5 * (np.asarray(self.color_a) + np.asarray(self.color_b))

    def mover_center_at(self, t: int) -> np.ndarray:
        c = np.asarray(self.mover.center, dtype=np.float64)
        v = np.asarray(self.mover.velocity, dtype=np.float64)
        return c + t * v

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "checker_period": self.checker_period,
            "color_a": list(self.color_a),
            "color_b": list(self.color_b),
            "boxes": [{"center": list(b.center), "half": list(b.half),
                       "color": list(b.color)} for b in self.boxes],
            "mover": {"center": list(self.mover.center),
                      "velocity": list(self.mover.velocity),
                      "radius": self.mover.radius,
                      "color": list(self.mover.color)},
            "scene_tag": self.scene_tag,
        }

    @staticmethod
    def from_dict(d: dict) -> "SceneSpec":
        return SceneSpec(
            seed=d["seed"],
            checker_period=d["checker_period"],
            color_a=tuple(d["color_a"]),
            color_b=tuple(d["color_b"]),
            boxes=tuple(Box(tuple(b["center"]), tuple(b["half"]), tuple(b["color"]))
                        for b in d["boxes"]),
            mover=Mover(tuple(d["mover"]["center"]), tuple(d["mover"]["velocity"]),
                        d["mover"]["radius"], tuple(d["mover"]["color"])),
            scene_tag=d["scene_tag"],
        )


def _segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    """Distance from point p to segment ab (2-D)."""
    ab = b - a
    denom = float(ab @ ab)
    t = 0.0 if denom == 0 else float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    return float(np.linalg.norm(p - (a + t * ab)))


def build_scene(seed: int, difficulty: str = "static") -> SceneSpec:
    """Seeded scene: checker ground, a few boxes, one sphere.

    difficulty 'static' zeroes the mover velocity; 'dynamic' gives it a
    constant per-frame drift.
    """
    if difficulty not in ("static", "dynamic"):
        raise ValueError(f"difficulty must be static|dynamic, got {difficulty!r}")
    rng = np.random.default_rng(seed)

    tag = int(rng.integers(0, NUM_TAGS))
    color_a, color_b = PALETTES[tag]
    period = float(rng.uniform(1.3, 2.0))

    radius = float(rng.uniform(0.3, 0.5))
    mover_center = (float(rng.uniform(-2.0, 2.0)), GROUND_Y - radius - 0.1,
                    float(rng.uniform(3.0, 6.0)))
    if difficulty == "dynamic":
        direction = rng.normal(size=2)
        direction /= np.linalg.norm(direction)
        speed = float(rng.uniform(0.02, 0.05))
        velocity = (float(direction[0] * speed), 0.0, float(direction[1] * speed))
    else:
        velocity = (0.0, 0.0, 0.0)
    mover = Mover(mover_center, velocity, radius,
                  tuple(float(c) for c in rng.uniform(0.3, 1.0, size=3)))

    # Mover path over a nominal horizon, kept clear of box placements so the
    # sphere never spawns inside or dives through scenery.
    p0 = np.array([mover_center[0], mover_center[2]])
    p1 = p0 + 64.0 * np.array([velocity[0], velocity[2]])

    boxes: List[Box] = []
    n_boxes = int(rng.integers(2, 5))
    for _ in range(n_boxes):
        for _attempt in range(16):
            half = rng.uniform([0.3, 0.35, 0.3], [0.65, 0.9, 0.65])
            cx = float(rng.uniform(-3.5, 3.5))
            cz = float(rng.uniform(3.0, 8.5))
            clearance = float(np.hypot(half[0], half[2])) + radius + 0.25
            if _segment_distance(np.array([cx, cz]), p0, p1) >= clearance:
                color = tuple(float(c) for c in rng.uniform(0.3, 0.85, size=3))
                boxes.append(Box((cx, GROUND_Y - float(half[1]), cz),
                                 tuple(float(h) for h in half), color))
                break

    return SceneSpec(seed=seed, checker_period=period, color_a=color_a,
                     color_b=color_b, boxes=tuple(boxes), mover=mover, scene_tag=tag)
