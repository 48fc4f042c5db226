"""Headless scripted roaming: drive a session from a command list and
persist the run for later evaluation."""

from __future__ import annotations

import json
import time
from pathlib import Path
from typing import List, Sequence

import numpy as np

from roamgen.geometry import (
    InteractionCommand,
    Pose,
    quaternion_to_rotation,
    rotation_to_quaternion,
)
from roamgen.engine.session import Session


def run_script(session: Session, commands: Sequence[InteractionCommand]):
    """Returns (frames (N,H,W,3), per-chunk poses, masks (N,H,W), seconds)."""
    frames: List[np.ndarray] = []
    masks: List[np.ndarray] = []
    poses: List[Pose] = []
    t0 = time.perf_counter()
    for cmd in commands:
        chunk, warps = session.step(cmd)
        frames.extend(chunk)
        masks.extend(w.mask for w in warps)
        poses.append(session.pose)
    elapsed = time.perf_counter() - t0
    return np.stack(frames), poses, np.stack(masks), elapsed


def parse_command_script(raw) -> List[InteractionCommand]:
    return [InteractionCommand(item["kind"], float(item.get("magnitude", 0.0)))
            for item in raw]


def save_run(out_dir, frames: np.ndarray, poses: Sequence[Pose], masks: np.ndarray,
             elapsed: float, commands: Sequence[InteractionCommand],
             episode_path: str, seed: int, chunk_len: int) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = {
        "seed": seed,
        "episode": str(episode_path),
        "chunk_len": chunk_len,
        "frame_count": int(frames.shape[0]),
        "height": int(frames.shape[1]),
        "width": int(frames.shape[2]),
        "elapsed_seconds": elapsed,
        "commands": [{"kind": c.kind.value, "magnitude": c.magnitude} for c in commands],
        "poses": [{"quaternion": rotation_to_quaternion(p.rotation).tolist(),
                   "translation": p.translation.tolist()} for p in poses],
    }
    (out / "run.json").write_text(json.dumps(meta, indent=1))
    frames.astype("<f4").tofile(out / "frames.bin")
    masks.astype(np.uint8).tofile(out / "masks.bin")
    return out


def load_run(run_dir):
    run = Path(run_dir)
    meta = json.loads((run / "run.json").read_text())
    n, h, w = meta["frame_count"], meta["height"], meta["width"]
    frames = np.fromfile(run / "frames.bin", dtype="<f4").reshape(n, h, w, 3)
    masks = np.fromfile(run / "masks.bin", dtype=np.uint8).reshape(n, h, w).astype(bool)
    poses = [Pose(quaternion_to_rotation(np.array(p["quaternion"])),
                  np.array(p["translation"])) for p in meta["poses"]]
    commands = parse_command_script(meta["commands"])
    return meta, frames, masks, poses, commands
