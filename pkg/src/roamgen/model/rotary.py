"""Rotary position application over fixed bands.

Cached keys are stored pre-rotary; rotation happens at read time with the
band position of the entry's role (reference / history slot / current), so
a cached block's rotated keys are a pure function of its content and age,
never of how many chunks came before it.
"""

from __future__ import annotations

import numpy as np
import torch

from roamgen.model.config import PositionBands
from roamgen.model.blocks import BlockKind


def assign_positions(kind: BlockKind, bands: PositionBands, age: int = 1) -> np.ndarray:
    """Token position indices for a block of the given role.

    Token j gets band_start + j; history entries use their age slot
    (age 1 = newest), independent of any chunk index.
    """
    t = bands.tokens_per_block
    if kind is BlockKind.CURRENT:
        start = bands.current_start
    elif kind is BlockKind.REFERENCE:
        start = bands.reference_start
    else:
        start = bands.history_slot_start(age)
    return np.arange(t, dtype=np.int64) + start


def rotary_angles(positions, head_dim: int, base: float, dtype, device) -> tuple:
    """(cos, sin) tables of shape (T, head_dim/2) for integer positions."""
    pos = torch.as_tensor(positions, dtype=dtype, device=device)
    half = head_dim // 2
    inv_freq = base ** (-torch.arange(half, dtype=dtype, device=device) / half)
    angles = pos[:, None] * inv_freq[None, :]
    return torch.cos(angles), torch.sin(angles)


def apply_rotary(x: torch.Tensor, positions, base: float) -> torch.Tensor:
    """Rotate (..., T, heads, head_dim) by per-token positions (half-split pairs)."""
    head_dim = x.shape[-1]
    cos, sin = rotary_angles(positions, head_dim, base, x.dtype, x.device)
    cos = cos[:, None, :]
    sin = sin[:, None, :]
    x1, x2 = x[..., : head_dim // 2], x[..., head_dim // 2:]
    return torch.cat([x1 * cos - x2 * sin, x1 * sin + x2 * cos], dim=-1)
