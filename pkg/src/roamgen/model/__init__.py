"""Block-causal denoising transformer and its token/positioning machinery."""

from roamgen.model.config import DenoiserConfig, NoiseSchedule, PositionBands
from roamgen.model.blocks import (
    BlockKind,
    LatentBlock,
    patchify,
    unpatchify,
    warp_to_tokens,
)
from roamgen.model.rotary import assign_positions
from roamgen.model.denoiser import ChunkConditions, Denoiser, attention_mask
from roamgen.model.sampler import sample_chunk
from roamgen.model.checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "DenoiserConfig", "NoiseSchedule", "PositionBands",
    "BlockKind", "LatentBlock", "patchify", "unpatchify", "warp_to_tokens",
    "assign_positions", "attention_mask", "Denoiser", "ChunkConditions",
    "sample_chunk", "save_checkpoint", "load_checkpoint",
]
