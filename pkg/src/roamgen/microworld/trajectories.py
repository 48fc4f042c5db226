"""Seeded command scripts and their pose folds.

Scripts are one command per chunk; within a chunk the camera holds its
pose while world time keeps advancing, matching the generation cadence.
A bounds check keeps the sampled camera over the scene: a candidate move
that would leave the roaming box is replaced by a yaw, which is always
safe.
"""

from __future__ import annotations

from typing import List, Sequence

import numpy as np

from roamgen.geometry import (
    CommandKind,
    InteractionCommand,
    Pose,
    accumulate,
    command_to_delta,
)

_MOVE_KINDS = (
    CommandKind.MOVE_FORWARD, CommandKind.MOVE_FORWARD, CommandKind.MOVE_FORWARD,
    CommandKind.STRAFE_LEFT, CommandKind.STRAFE_RIGHT,
    CommandKind.YAW_LEFT, CommandKind.YAW_RIGHT,
    CommandKind.MOVE_BACK, CommandKind.MOVE_UP, CommandKind.MOVE_DOWN,
    CommandKind.PITCH_UP, CommandKind.PITCH_DOWN, CommandKind.STOP,
)

_BOUNDS_LO = np.array([-4.0, -1.0, -1.5])
_BOUNDS_HI = np.array([4.0, 1.0, 7.0])


def _in_bounds(pose: Pose) -> bool:
    t = pose.translation
    return bool(np.all(t >= _BOUNDS_LO) and np.all(t <= _BOUNDS_HI))


def sample_command_script(rng: np.random.Generator, chunks: int) -> List[InteractionCommand]:
    """One seeded command per chunk, bounds-checked against the roam box."""
    script: List[InteractionCommand] = []
    pose = Pose.identity()
    for _ in range(chunks):
        kind = _MOVE_KINDS[int(rng.integers(0, len(_MOVE_KINDS)))]
        if kind is CommandKind.STOP:
            cmd = InteractionCommand(CommandKind.STOP, 0.0)
        elif kind in (CommandKind.YAW_LEFT, CommandKind.YAW_RIGHT,
                      CommandKind.PITCH_UP, CommandKind.PITCH_DOWN):
            cmd = InteractionCommand(kind, float(rng.uniform(8.0, 15.0)))
        else:
            cmd = InteractionCommand(kind, float(rng.uniform(0.15, 0.3)))
        cand = accumulate(pose, command_to_delta(cmd))
        if not _in_bounds(cand):
            cmd = InteractionCommand(CommandKind.YAW_RIGHT, 15.0)
            cand = accumulate(pose, command_to_delta(cmd))
        script.append(cmd)
        pose = cand
    return script


_TRANSLATION_KINDS = (
    CommandKind.MOVE_FORWARD, CommandKind.MOVE_BACK,
    CommandKind.STRAFE_LEFT, CommandKind.STRAFE_RIGHT,
    CommandKind.MOVE_UP, CommandKind.MOVE_DOWN,
)


def sample_translation_script(rng: np.random.Generator,
                              chunks: int) -> List[InteractionCommand]:
    """Persistent translating trajectory: one primary direction per script,
    with occasional orthogonal jitter. Used for held-out roaming scripts."""
    primary = _TRANSLATION_KINDS[int(rng.integers(0, len(_TRANSLATION_KINDS)))]
    script = []
    for _ in range(chunks):
        kind = primary
        if rng.random() < 0.2:
            kind = _TRANSLATION_KINDS[int(rng.integers(0, len(_TRANSLATION_KINDS)))]
        script.append(InteractionCommand(kind, float(rng.uniform(0.2, 0.3))))
    return script


def script_to_poses(script: Sequence[InteractionCommand], chunk_len: int,
                    start: Pose | None = None) -> List[Pose]:
    """Fold a script into per-frame poses (constant within each chunk)."""
    pose = start if start is not None else Pose.identity()
    poses: List[Pose] = []
    for cmd in script:
        pose = accumulate(pose, command_to_delta(cmd))
        poses.extend([pose] * chunk_len)
    return poses
