"""SE(3) poses and the command-to-motion mapping.

A Pose is a rigid transform (R, t); composing camera-to-world poses with
local deltas moves the camera in its own frame. Yaw rotates about the
camera y axis (down), pitch about the camera x axis (right); positive yaw
turns right and positive pitch looks up, so the named commands negate
angles where needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

_ORTHO_TOL = 1e-6


def _check_rotation(r: np.ndarray) -> None:
    if r.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got {r.shape}")
    if not np.all(np.isfinite(r)):
        raise ValueError("rotation contains non-finite entries")
    err = np.abs(r.T @ r - np.eye(3)).max()
    if err > _ORTHO_TOL:
        raise ValueError(f"rotation not orthonormal (max error {err:.3e})")
    det = np.linalg.det(r)
    if abs(det - 1.0) > _ORTHO_TOL:
        raise ValueError(f"rotation determinant {det:.9f} != +1")


def _orthonormalize(r: np.ndarray) -> np.ndarray:
    """Project a near-rotation onto SO(3) via SVD."""
    u, _, vt = np.linalg.svd(r)
    out = u @ vt
    if np.linalg.det(out) < 0:
        u[:, -1] *= -1.0
        out = u @ vt
    return out


@dataclass(frozen=True)
class Pose:
    """Rigid transform: x_out = rotation @ x_in + translation."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if not np.all(np.isfinite(t)):
            raise ValueError("translation contains non-finite entries")
        _check_rotation(r)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "Pose":
        return Pose()

    @staticmethod
    def from_matrix(m: np.ndarray) -> "Pose":
        m = np.asarray(m, dtype=np.float64)
        if m.shape != (4, 4):
            raise ValueError(f"expected 4x4 homogeneous matrix, got {m.shape}")
        return Pose(m[:3, :3], m[:3, 3])

    def matrix(self) -> np.ndarray:
        """4x4 homogeneous form."""
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def inverse(self) -> "Pose":
        rt = self.rotation.T
        return Pose(rt, -rt @ self.translation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform (..., 3) points."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.rotation.T + self.translation

    def allclose(self, other: "Pose", atol: float = 1e-9) -> bool:
        return bool(
            np.allclose(self.rotation, other.rotation, atol=atol)
            and np.allclose(self.translation, other.translation, atol=atol)
        )


def compose(a: Pose, b: Pose) -> Pose:
    """Pose equal to applying b first, then a."""
    r = a.rotation @ b.rotation
    if np.abs(r.T @ r - np.eye(3)).max() > _ORTHO_TOL:
        r = _orthonormalize(r)
    return Pose(r, a.rotation @ b.translation + a.translation)


def accumulate(prev: Pose, delta: Pose) -> Pose:
    """Fold one local delta onto the running pose: T_i = T_{i-1} ∘ ΔT_i."""
    return compose(prev, delta)


class CommandKind(str, Enum):
    MOVE_FORWARD = "move_forward"
    MOVE_BACK = "move_back"
    STRAFE_LEFT = "strafe_left"
    STRAFE_RIGHT = "strafe_right"
    MOVE_UP = "move_up"
    MOVE_DOWN = "move_down"
    YAW_LEFT = "yaw_left"
    YAW_RIGHT = "yaw_right"
    PITCH_UP = "pitch_up"
    PITCH_DOWN = "pitch_down"
    STOP = "stop"


_TRANSLATIONS = {
    CommandKind.MOVE_FORWARD: np.array([0.0, 0.0, 1.0]),
    CommandKind.MOVE_BACK: np.array([0.0, 0.0, -1.0]),
    CommandKind.STRAFE_LEFT: np.array([-1.0, 0.0, 0.0]),
    CommandKind.STRAFE_RIGHT: np.array([1.0, 0.0, 0.0]),
    CommandKind.MOVE_UP: np.array([0.0, -1.0, 0.0]),
    CommandKind.MOVE_DOWN: np.array([0.0, 1.0, 0.0]),
}

# (axis, sign) for rotations; with y down, +y yaw turns right and +x pitch
# tilts the view up (new forward = R @ (0,0,1)).
_ROTATIONS = {
    CommandKind.YAW_LEFT: (1, -1.0),
    CommandKind.YAW_RIGHT: (1, 1.0),
    CommandKind.PITCH_UP: (0, 1.0),
    CommandKind.PITCH_DOWN: (0, -1.0),
}


@dataclass(frozen=True)
class InteractionCommand:
    """One user instruction: a motion kind plus a magnitude.

    Magnitude is in world units for translations and degrees for rotations;
    stop carries magnitude 0.
    """

    kind: CommandKind
    magnitude: float = 0.0

    def __post_init__(self):
        kind = CommandKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if not math.isfinite(self.magnitude) or self.magnitude < 0:
            raise ValueError(f"magnitude must be finite and >= 0, got {self.magnitude}")
        if kind is CommandKind.STOP and self.magnitude != 0:
            raise ValueError("stop command must have magnitude 0")


@dataclass(frozen=True)
class StepConfig:
    """Default step sizes used when a command's magnitude is 0."""

    translation_step: float = 0.25
    rotation_step_deg: float = 15.0


def _axis_rotation(axis: int, angle_rad: float) -> np.ndarray:
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    r = np.eye(3)
    i, j = [(1, 2), (2, 0), (0, 1)][axis]
    r[i, i] = c
    r[j, j] = c
    r[i, j] = -s
    r[j, i] = s
    return r


def command_to_delta(cmd: InteractionCommand, step: StepConfig = StepConfig()) -> Pose:
    """Map a command to a local-frame pose delta ΔT.

    Translations move along the camera axes, rotations turn about them;
    a zero magnitude falls back to the configured default step.
    """
    if cmd.kind is CommandKind.STOP:
        return Pose.identity()
    if cmd.kind in _TRANSLATIONS:
        mag = cmd.magnitude if cmd.magnitude > 0 else step.translation_step
        return Pose(np.eye(3), _TRANSLATIONS[cmd.kind] * mag)
    axis, sign = _ROTATIONS[cmd.kind]
    mag = cmd.magnitude if cmd.magnitude > 0 else step.rotation_step_deg
    return Pose(_axis_rotation(axis, sign * math.radians(mag)), np.zeros(3))


def rotation_to_quaternion(r: np.ndarray) -> np.ndarray:
    """Rotation matrix -> unit quaternion (w, x, y, z), w >= 0."""
    m = np.asarray(r, dtype=np.float64)
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    if tr > 0:
        s = math.sqrt(tr + 1.0) * 2.0
        q = np.array([0.25 * s,
                      (m[2, 1] - m[1, 2]) / s,
                      (m[0, 2] - m[2, 0]) / s,
                      (m[1, 0] - m[0, 1]) / s])
    else:
        i = int(np.argmax([m[0, 0], m[1, 1], m[2, 2]]))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = math.sqrt(max(m[i, i] - m[j, j] - m[k, k] + 1.0, 0.0)) * 2.0
        q = np.empty(4)
        q[0] = (m[k, j] - m[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (m[j, i] + m[i, j]) / s
        q[1 + k] = (m[k, i] + m[i, k]) / s
    if q[0] < 0:
        q = -q
    return q / np.linalg.norm(q)


def quaternion_to_rotation(q: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) -> rotation matrix."""
    w, x, y, z = np.asarray(q, dtype=np.float64) / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])
