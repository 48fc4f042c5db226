"""Episodes: rendered frame/depth/pose sequences and their on-disk format.

An episode directory holds `meta.json` plus two raw little-endian float32
blobs, `frames.bin` (frame-major H x W x 3 rasters) and `depths.bin`
(frame-major H x W depth rasters, 0.0 at invalid pixels).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence

import numpy as np

from roamgen.geometry import (
    DepthMap,
    Intrinsics,
    Pose,
    quaternion_to_rotation,
    rotation_to_quaternion,
)
from roamgen.microworld.render import render
from roamgen.microworld.scene import SceneSpec


@dataclass
class Episode:
    frames: np.ndarray          # (N, H, W, 3) float32 in [0, 1]
    depth_values: np.ndarray    # (N, H, W) float32, 0 where invalid
    poses: List[Pose]           # camera-to-world, one per frame
    intrinsics: Intrinsics
    scene_tag: int
    chunk_len: int
    scene: SceneSpec | None = None

    def __post_init__(self):
        n = self.frames.shape[0]
        if self.depth_values.shape[0] != n or len(self.poses) != n:
            raise ValueError("frames, depths and poses must have equal length")
        if n % self.chunk_len != 0:
            raise ValueError(f"frame count {n} not a multiple of chunk length {self.chunk_len}")

    @property
    def frame_count(self) -> int:
        return int(self.frames.shape[0])

    @property
    def num_chunks(self) -> int:
        return self.frame_count // self.chunk_len

    def depth(self, i: int) -> DepthMap:
        values = self.depth_values[i]
        return DepthMap(values=values, valid=values > 0)

    def chunk_frames(self, chunk: int) -> np.ndarray:
        lo = chunk * self.chunk_len
        return self.frames[lo:lo + self.chunk_len]

    def chunk_pose(self, chunk: int) -> Pose:
        return self.poses[chunk * self.chunk_len]


def generate_episode(scene: SceneSpec, trajectory: Sequence[Pose], k: Intrinsics,
                     chunk_len: int = 4) -> Episode:
    """Render every trajectory pose at its frame index."""
    if len(trajectory) == 0 or len(trajectory) % chunk_len != 0:
        raise ValueError(f"trajectory length {len(trajectory)} is not a positive "
                         f"multiple of chunk length {chunk_len}")
    frames = np.empty((len(trajectory), k.height, k.width, 3), dtype=np.float32)
    depths = np.empty((len(trajectory), k.height, k.width), dtype=np.float32)
    for t, pose in enumerate(trajectory):
        frame, depth = render(scene, pose, k, t)
        frames[t] = frame
        depths[t] = np.where(depth.valid, depth.values, 0.0)
    return Episode(frames=frames, depth_values=depths, poses=list(trajectory),
                   intrinsics=k, scene_tag=scene.scene_tag, chunk_len=chunk_len,
                   scene=scene)


def save_episode(episode: Episode, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = {
        "intrinsics": episode.intrinsics.to_dict(),
        "poses": [{"quaternion": rotation_to_quaternion(p.rotation).tolist(),
                   "translation": p.translation.tolist()} for p in episode.poses],
        "scene_tag": episode.scene_tag,
        "frame_count": episode.frame_count,
        "k": episode.chunk_len,
    }
    if episode.scene is not None:
        meta["scene"] = episode.scene.to_dict()
    (out / "meta.json").write_text(json.dumps(meta, indent=1))
    episode.frames.astype("<f4").tofile(out / "frames.bin")
    episode.depth_values.astype("<f4").tofile(out / "depths.bin")
    return out


def load_episode(path: str | Path) -> Episode:
    path = Path(path)
    meta = json.loads((path / "meta.json").read_text())
    k = Intrinsics.from_dict(meta["intrinsics"])
    n = meta["frame_count"]
    frames = np.fromfile(path / "frames.bin", dtype="<f4").reshape(n, k.height, k.width, 3)
    depths = np.fromfile(path / "depths.bin", dtype="<f4").reshape(n, k.height, k.width)
    poses = [Pose(quaternion_to_rotation(np.array(p["quaternion"])),
                  np.array(p["translation"])) for p in meta["poses"]]
    scene = SceneSpec.from_dict(meta["scene"]) if "scene" in meta else None
    return Episode(frames=frames, depth_values=depths, poses=poses, intrinsics=k,
                   scene_tag=meta["scene_tag"], chunk_len=meta["k"], scene=scene)
