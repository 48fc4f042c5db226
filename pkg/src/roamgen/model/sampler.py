"""Few-step stochastic sampler.

Start from pure noise at the top sigma; each step predicts the clean
block and re-noises it at the next (smaller) sigma; the final step returns
the clean prediction. All noise is counter-addressed by (chunk, step), so
any chunk's sampling is exactly replayable in isolation.
"""

from __future__ import annotations

import torch

from roamgen.model.config import NoiseSchedule
from roamgen.model.denoiser import ChunkConditions, Denoiser
from roamgen.stcache.rng import CounterRng


def sample_chunk(model: Denoiser, schedule: NoiseSchedule, cond: ChunkConditions,
                 rng: CounterRng, chunk_index: int, batch: int = 1) -> torch.Tensor:
    cfg = model.config
    shape = (batch, cfg.tokens_per_block, cfg.token_dim)
    x = schedule.sigmas[0] * rng.randn(shape, chunk=chunk_index, step=0, name="init",
                                       dtype=model.dtype, device=model.device)
    x0 = x
    for s, sigma in enumerate(schedule.sigmas):
        x0 = model(x, sigma, cond)
        if s + 1 < schedule.count:
            eps = rng.randn(shape, chunk=chunk_index, step=s + 1, name="renoise",
                            dtype=model.dtype, device=model.device)
            x = x0 + schedule.sigmas[s + 1] * eps
    return x0
