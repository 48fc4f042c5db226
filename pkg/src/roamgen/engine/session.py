"""Interactive generation sessions.

A session owns the trained denoiser (read-only), the KV cache, the pose
fold of every consumed command, and world time. One step consumes one
command, builds the reference/warp conditions at the new pose, denoises a
chunk through the cache, and returns its frames.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import torch

from roamgen.geometry import (
    InteractionCommand,
    Pose,
    StepConfig,
    accumulate,
    command_to_delta,
    compose,
    unproject,
)
from roamgen.microworld.episode import Episode
from roamgen.microworld.render import render
from roamgen.model.blocks import BlockKind, LatentBlock, decode_tokens, warp_to_tokens
from roamgen.model.config import NoiseSchedule
from roamgen.model.denoiser import ChunkConditions, Denoiser
from roamgen.model.sampler import sample_chunk
from roamgen.stcache.cache import STCache
from roamgen.stcache.rng import CounterRng
from roamgen.engine.conditions import chunk_warps, clamp_chunk, reference_chunk_tokens


class ReferenceExhausted(RuntimeError):
    """Strict retrieval ran past the end of the reference episode."""


class PointCloudMemory:
    """World-space store of generated content; oldest source evicted first."""

    def __init__(self, budget: int = 200_000):
        if budget <= 0:
            raise ValueError("budget must be positive")
        self.budget = budget
        self.points = np.zeros((0, 3))
        self.colors = np.zeros((0, 3), dtype=np.float32)
        self.source_chunk = np.zeros((0,), dtype=np.int64)

    def __len__(self) -> int:
        return self.points.shape[0]

    def extend(self, points: np.ndarray, colors: np.ndarray, chunk_index: int) -> None:
        self.points = np.concatenate([self.points, points], axis=0)
        self.colors = np.concatenate([self.colors, colors.astype(np.float32)], axis=0)
        self.source_chunk = np.concatenate(
            [self.source_chunk, np.full(points.shape[0], chunk_index, dtype=np.int64)])
        if len(self) > self.budget:
            keep = np.argsort(self.source_chunk, kind="stable")[len(self) - self.budget:]
            keep.sort()
            self.points = self.points[keep]
            self.colors = self.colors[keep]
            self.source_chunk = self.source_chunk[keep]


@dataclass
class Session:
    model: Denoiser
    schedule: NoiseSchedule
    reference: Episode
    seed: int = 0
    step_config: StepConfig = field(default_factory=StepConfig)
    strict_reference: bool = False
    memory: Optional[PointCloudMemory] = None
    freeze_time: bool = False

    def __post_init__(self):
        self.model.eval()
        self.model.requires_grad_(False)
        self.cache = STCache(self.model.config)
        self.rng = CounterRng(self.seed)
        # Roaming resumes from the reference video's starting viewpoint.
        self.start_pose = self.reference.poses[0]
        self.pose = self.start_pose
        self.chunk_index = 0
        self.world_time = 0
        self.tag = int(self.reference.scene_tag)
        self.consumed: List[InteractionCommand] = []

    def audit_pose(self) -> Pose:
        """Re-fold every consumed command from the start pose; must equal
        self.pose."""
        pose = self.start_pose
        for cmd in self.consumed:
            pose = accumulate(pose, command_to_delta(cmd, self.step_config))
        return pose

    def relative_pose(self) -> Pose:
        """Pose fold relative to the reference start (identity at spawn)."""
        return compose(self.start_pose.inverse(), self.pose)

    def select_reference(self, i: int) -> LatentBlock:
        """Index-aligned reference chunk, clamped at the episode end."""
        if self.strict_reference and i >= self.reference.num_chunks:
            raise ReferenceExhausted(
                f"chunk {i} beyond reference ({self.reference.num_chunks} chunks)")
        rc = clamp_chunk(self.reference, i)
        tokens = reference_chunk_tokens(self.reference, rc, self.model.config,
                                        self.model.dtype)
        return LatentBlock(tokens=tokens, chunk_index=rc, kind=BlockKind.REFERENCE)

    def step(self, cmd: InteractionCommand):
        """Consume one command, emit one chunk of frames.

        Returns (frames (K, H, W, 3) float32 in [0, 1], WarpResult list).
        """
        cfg = self.model.config
        delta = command_to_delta(cmd, self.step_config)
        self.pose = accumulate(self.pose, delta)
        self.consumed.append(cmd)
        i = self.chunk_index

        ref_block = self.select_reference(i)
        target_poses = [self.pose] * cfg.frames_per_chunk
        warps = chunk_warps(self.reference, ref_block.chunk_index, target_poses,
                            memory=self.memory)
        warp_tokens = warp_to_tokens(warps, cfg).to(self.model.dtype)

        tag = torch.tensor([self.tag])
        with torch.no_grad():
            self.cache.set_reference(self.model.encode_block_kv(
                ref_block.tokens[None], tag=tag))
            cond = ChunkConditions(cache_view=self.cache.view(),
                                   warp_tokens=warp_tokens[None], tag=tag)
            out = sample_chunk(self.model, self.schedule, cond, self.rng,
                               chunk_index=i, batch=1)
            kvs = self.model.encode_block_kv(out, tag=tag)
        self.cache.append_history(kvs, chunk_index=i,
                                  rng_cursor=self.rng.cursor(i))

        frames = decode_tokens(out[0], cfg).numpy().astype(np.float32)
        if self.memory is not None:
            self.extend_pointcloud_memory(frames)

        self.chunk_index += 1
        if not self.freeze_time:
            self.world_time += cfg.frames_per_chunk
        return frames, warps

    def extend_pointcloud_memory(self, frames: np.ndarray) -> None:
        """Lift generated frames to world points with oracle depth at T_i."""
        if self.memory is None or self.reference.scene is None:
            return
        k = self.reference.intrinsics
        t0 = self.world_time
        pts_all, col_all = [], []
        for f in range(frames.shape[0]):
            _, depth = render(self.reference.scene, self.pose, k, t0 + f)
            pts, _ = unproject(depth, k, self.pose)
            vv, uu = np.nonzero(depth.valid)
            pts_all.append(pts)
            col_all.append(frames[f][vv, uu])
        self.memory.extend(np.concatenate(pts_all), np.concatenate(col_all),
                           self.chunk_index)


def select_reference(session: Session, i: int) -> LatentBlock:
    return session.select_reference(i)
