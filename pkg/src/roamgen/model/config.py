"""Model configuration, noise schedules, and fixed rotary position bands."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np


@dataclass(frozen=True)
class DenoiserConfig:
    layers: int = 3
    heads: int = 4
    width: int = 192                 # transformer hidden width
    patch: int = 16
    frame_height: int = 64
    frame_width: int = 64
    frames_per_chunk: int = 4        # K
    history_window: int = 1          # W, in blocks
    rotary_base: float = 10000.0
    image_channels: int = 3
    tag_vocab: int = 8
    mlp_ratio: float = 4.0

    def __post_init__(self):
        if self.width % self.heads != 0:
            raise ValueError("width must be divisible by heads")
        if (self.width // self.heads) % 2 != 0:
            raise ValueError("head dim must be even for rotary pairs")
        if self.frame_height % self.patch or self.frame_width % self.patch:
            raise ValueError("frame size must be a multiple of the patch size")
        if self.history_window < 1:
            raise ValueError("history window must be >= 1")

    @property
    def head_dim(self) -> int:
        return self.width // self.heads

    @property
    def patches_per_frame(self) -> int:
        return (self.frame_height // self.patch) * (self.frame_width // self.patch)

    @property
    def tokens_per_block(self) -> int:
        return self.frames_per_chunk * self.patches_per_frame

    @property
    def token_dim(self) -> int:
        """Latent channel width: one patchified pixel patch per token."""
        return self.image_channels * self.patch * self.patch

    @property
    def geo_dim(self) -> int:
        """Geometric condition channels: warped frame plus coverage mask."""
        return (self.image_channels + 1) * self.patch * self.patch

    def bands(self) -> "PositionBands":
        t = self.tokens_per_block
        return PositionBands(reference_start=0, history_start=t,
                             current_start=t * (1 + self.history_window),
                             tokens_per_block=t,
                             history_window=self.history_window)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "layers", "heads", "width", "patch", "frame_height", "frame_width",
            "frames_per_chunk", "history_window", "rotary_base",
            "image_channels", "tag_vocab", "mlp_ratio")}

    @staticmethod
    def from_dict(d: dict) -> "DenoiserConfig":
        return DenoiserConfig(**d)


@dataclass(frozen=True)
class PositionBands:
    """Chunk-independent rotary position offsets for each block role.

    Layout is [reference | history slots, oldest first | current], all
    contiguous and pairwise disjoint. A history entry's slot depends only
    on its age in the sliding window, never on the absolute chunk index,
    which is what keeps cached keys reusable forever.
    """

    reference_start: int
    history_start: int
    current_start: int
    tokens_per_block: int
    history_window: int = 1

    def __post_init__(self):
        t = self.tokens_per_block
        spans = [(self.reference_start, self.reference_start + t),
                 (self.history_start, self.history_start + t * self.history_window),
                 (self.current_start, self.current_start + t)]
        for i in range(len(spans)):
            for j in range(i + 1, len(spans)):
                lo = max(spans[i][0], spans[j][0])
                hi = min(spans[i][1], spans[j][1])
                if lo < hi:
                    raise ValueError(f"position bands overlap: {spans[i]} vs {spans[j]}")

    def history_slot_start(self, age: int) -> int:
        """Band offset for a history entry; age 1 is the newest entry."""
        if not 1 <= age <= self.history_window:
            raise ValueError(f"history age {age} outside window {self.history_window}")
        return self.history_start + (self.history_window - age) * self.tokens_per_block


@dataclass(frozen=True)
class NoiseSchedule:
    """Strictly decreasing positive sigma ladder; the final sampler step
    emits the clean prediction directly."""

    sigmas: Tuple[float, ...] = field(default=(5.0, 1.0770329614269007, 0.23207944168063894, 0.05))

    def __post_init__(self):
        if len(self.sigmas) == 0:
            raise ValueError("schedule needs at least one sigma")
        arr = np.asarray(self.sigmas, dtype=np.float64)
        if np.any(arr <= 0) or np.any(np.diff(arr) >= 0):
            raise ValueError("sigmas must be strictly decreasing and positive")

    @property
    def count(self) -> int:
        return len(self.sigmas)

    @property
    def sigma_max(self) -> float:
        return self.sigmas[0]

    @property
    def sigma_min(self) -> float:
        return self.sigmas[-1]

    @staticmethod
    def geometric(sigma_max: float = 5.0, sigma_min: float = 0.05,
                  count: int = 4) -> "NoiseSchedule":
        return NoiseSchedule(tuple(np.geomspace(sigma_max, sigma_min, count).tolist()))
