"""Chunked autoregressive rollout over fixed per-chunk conditions.

Used by distillation training (where the condition list comes from a
batch) and by the chunk-replay machinery. Each chunk: refresh the
reference anchor, denoise with the cache, then encode the clean output
into the history window. Zeroed reference tokens stand in for the
tag-only task so the attention layout never changes between tasks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import torch

from roamgen.model.config import NoiseSchedule
from roamgen.model.denoiser import ChunkConditions, Denoiser
from roamgen.model.sampler import sample_chunk
from roamgen.stcache.cache import STCache
from roamgen.stcache.rng import CounterRng


@dataclass
class ChunkSpec:
    """Fixed conditioning for one chunk of a rollout."""

    ref_tokens: Optional[torch.Tensor] = None    # (B, T, D); None = zero block
    warp_tokens: Optional[torch.Tensor] = None   # (B, T, geo_dim)
    tag: Optional[torch.Tensor] = None           # (B,) long


class GenerationRollout:
    def __init__(self, model: Denoiser, schedule: NoiseSchedule,
                 conditions: List[ChunkSpec], rng: CounterRng, batch: int = 1):
        self.model = model
        self.schedule = schedule
        self.conditions = conditions
        self.rng = rng
        self.batch = batch
        self.cache = STCache(model.config)

    @property
    def num_chunks(self) -> int:
        return len(self.conditions)

    def reset(self) -> None:
        self.cache = STCache(self.model.config)

    def snapshot(self):
        return self.cache.snapshot()

    def restore(self, snap) -> None:
        self.cache.restore(snap)

    def _reference_tokens(self, spec: ChunkSpec) -> torch.Tensor:
        cfg = self.model.config
        if spec.ref_tokens is not None:
            return spec.ref_tokens.to(self.model.dtype)
        return torch.zeros(self.batch, cfg.tokens_per_block, cfg.token_dim,
                           dtype=self.model.dtype, device=self.model.device)

    def run_chunk(self, j: int) -> torch.Tensor:
        spec = self.conditions[j]
        self.cache.set_reference(self.model.encode_block_kv(
            self._reference_tokens(spec), tag=spec.tag))
        cond = ChunkConditions(cache_view=self.cache.view(),
                               warp_tokens=spec.warp_tokens, tag=spec.tag)
        out = sample_chunk(self.model, self.schedule, cond, self.rng,
                           chunk_index=j, batch=self.batch)
        kvs = self.model.encode_block_kv(out, tag=spec.tag)
        self.cache.append_history(kvs, chunk_index=j,
                                  rng_cursor=self.rng.cursor(j))
        return out

    def run_all(self) -> List[torch.Tensor]:
        self.reset()
        return [self.run_chunk(j) for j in range(self.num_chunks)]
