"""Builders for the geometric and reference conditions of a chunk."""

from __future__ import annotations

from typing import List

import torch

from roamgen.geometry import Pose, compose, reproject
from roamgen.geometry.warp import WarpResult, merge_warps, splat_world_points
from roamgen.microworld.episode import Episode
from roamgen.model.blocks import encode_frames, warp_to_tokens
from roamgen.model.config import DenoiserConfig


def clamp_chunk(episode: Episode, i: int) -> int:
    return min(i, episode.num_chunks - 1)


def chunk_warps(reference: Episode, ref_chunk: int, target_poses: List[Pose],
                memory=None) -> List[WarpResult]:
    """Warp each frame of a reference chunk into its target pose.

    With a point-cloud memory attached, its splat joins the reference under
    one z-buffer (reference wins ties).
    """
    k = reference.intrinsics
    warps = []
    for f in range(reference.chunk_len):
        idx = ref_chunk * reference.chunk_len + f
        rel = compose(target_poses[f].inverse(), reference.poses[idx])
        warp = reproject(reference.frames[idx], reference.depth(idx), k, rel)
        if memory is not None and len(memory) > 0:
            extra = splat_world_points(memory.points, memory.colors,
                                       target_poses[f].inverse(), k)
            warp = merge_warps(warp, extra)
        warps.append(warp)
    return warps


def reference_chunk_tokens(reference: Episode, ref_chunk: int,
                           config: DenoiserConfig, dtype=torch.float32) -> torch.Tensor:
    return encode_frames(reference.chunk_frames(ref_chunk), config).to(dtype)


def v2v_chunk_inputs(reference: Episode, target: Episode, i: int,
                     config: DenoiserConfig, dtype=torch.float32):
    """(ref_tokens, warp_tokens, target_tokens) for chunk i of a pair.

    The reference supplies the anchor and warp source; the target supplies
    the poses to warp into and the ground-truth frames.
    """
    rc = clamp_chunk(reference, i)
    lo = i * target.chunk_len
    target_poses = target.poses[lo:lo + target.chunk_len]
    ref_tokens = reference_chunk_tokens(reference, rc, config, dtype)
    warps = chunk_warps(reference, rc, target_poses)
    warp_tokens = warp_to_tokens(warps, config).to(dtype)
    target_tokens = encode_frames(target.chunk_frames(i), config).to(dtype)
    return ref_tokens, warp_tokens, target_tokens
