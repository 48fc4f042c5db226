"""Latent blocks and the lossless pixel<->token mapping.

A "latent" here is just a patchified pixel chunk: frames (K, H, W, C)
become (K*P, C*p*p) tokens and back, with no learned codec. Token order is
frame-major, then patch-grid row-major; patch contents are row-major
channel-last.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
import torch

from roamgen.geometry.warp import WarpResult
from roamgen.model.config import DenoiserConfig


class BlockKind(str, Enum):
    CURRENT = "current"
    HISTORY = "history"
    REFERENCE = "reference"


@dataclass
class LatentBlock:
    tokens: torch.Tensor     # (T, D) or (B, T, D)
    chunk_index: int
    kind: BlockKind = BlockKind.CURRENT

    def token_count(self) -> int:
        return int(self.tokens.shape[-2])


def patchify(frames, patch: int) -> torch.Tensor:
    """(K, H, W, C) frames -> (K*P, C*p*p) tokens."""
    x = torch.as_tensor(np.ascontiguousarray(frames)) if not torch.is_tensor(frames) else frames
    k, h, w, c = x.shape
    gh, gw = h // patch, w // patch
    x = x.reshape(k, gh, patch, gw, patch, c)
    x = x.permute(0, 1, 3, 2, 4, 5)
    return x.reshape(k * gh * gw, patch * patch * c)


def encode_frames(frames, config: DenoiserConfig) -> torch.Tensor:
    """Frames in [0, 1] -> zero-centered latent tokens in [-1, 1]."""
    return patchify(frames, config.patch) * 2.0 - 1.0


def decode_tokens(tokens: torch.Tensor, config: DenoiserConfig) -> torch.Tensor:
    """Latent tokens -> frames clamped to [0, 1]; inverse of encode_frames."""
    return ((unpatchify(tokens, config) + 1.0) * 0.5).clamp(0.0, 1.0)


def unpatchify(tokens: torch.Tensor, config: DenoiserConfig) -> torch.Tensor:
    """(K*P, D) tokens -> (K, H, W, C) frames; exact inverse of patchify."""
    p = config.patch
    gh = config.frame_height // p
    gw = config.frame_width // p
    k = config.frames_per_chunk
    x = tokens.reshape(k, gh, gw, p, p, config.image_channels)
    x = x.permute(0, 1, 3, 2, 4, 5)
    return x.reshape(k, config.frame_height, config.frame_width, config.image_channels)


def warp_to_tokens(warps: Sequence[WarpResult], config: DenoiserConfig) -> torch.Tensor:
    """Patchify per-frame warp conditions into (T, geo_dim) tokens.

    Channels are the warped frame plus its binary coverage mask, so the
    model can tell dark texture from uncovered regions.
    """
    if len(warps) != config.frames_per_chunk:
        raise ValueError(f"expected {config.frames_per_chunk} warped frames, got {len(warps)}")
    stacked = np.stack([
        np.concatenate([w.frame, w.mask[..., None].astype(np.float32)], axis=-1)
        for w in warps
    ])
    if stacked.shape[1:3] != (config.frame_height, config.frame_width):
        raise ValueError("warp raster size does not match the model's frame size")
    return patchify(stacked, config.patch)
