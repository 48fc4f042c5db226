"""Trajectory comparison metrics."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from roamgen.geometry.pose import Pose, compose


def _align_to_start(poses: Sequence[Pose]) -> list[Pose]:
    inv0 = poses[0].inverse()
    return [compose(inv0, p) for p in poses]


def geodesic_angle_deg(ra: np.ndarray, rb: np.ndarray) -> float:
    """Angle of the rotation taking ra to rb, in degrees.

    Uses ||ra - rb||_F = 2*sqrt(2)*sin(angle/2), which stays accurate near
    zero where the trace/acos form loses precision.
    """
    half_sin = np.linalg.norm(ra - rb) / (2.0 * math.sqrt(2.0))
    return math.degrees(2.0 * math.asin(min(1.0, half_sin)))


def trajectory_error(estimated: Sequence[Pose], reference: Sequence[Pose]):
    """Mean rotation error (degrees) and scale-normalized translation error.

    Both trajectories are re-expressed relative to their own first pose;
    translations are divided by the reference's maximum displacement from
    its start (span), so the translation error is unitless. A motionless
    reference keeps scale 1.
    """
    if len(estimated) == 0 or len(estimated) != len(reference):
        raise ValueError("trajectories must be nonempty and equal length")
    # Geodesic rotation distance is bi-invariant, so rotations need no
    # alignment; only translations are compared in start-aligned frames.
    rot = float(np.mean([geodesic_angle_deg(e.rotation, r.rotation)
                         for e, r in zip(estimated, reference)]))

    est = _align_to_start(estimated)
    ref = _align_to_start(reference)
    span = max(float(np.linalg.norm(p.translation)) for p in ref)
    scale = 1.0 / span if span > 0 else 1.0
    trans = float(np.mean([np.linalg.norm((e.translation - r.translation) * scale)
                           for e, r in zip(est, ref)]))
    return rot, trans
