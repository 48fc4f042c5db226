"""Teacher pretraining: standard multi-step diffusion over chunks.

The motion teacher sees full conditions (reference anchor, warp channels,
previous ground-truth chunk in the cache); the perceptual teacher is
tag-only. Noise levels are log-uniform over the working sigma range, and
all randomness is counter-addressed so runs are reproducible bit for bit.
"""

from __future__ import annotations

import math
from typing import List, Optional

import torch

from roamgen.engine.conditions import v2v_chunk_inputs
from roamgen.model.blocks import encode_frames
from roamgen.model.config import NoiseSchedule
from roamgen.model.denoiser import ChunkConditions, Denoiser
from roamgen.stcache.cache import STCache
from roamgen.stcache.rng import CounterRng
from roamgen.training.datasets import PairedEpisodeDataset
from roamgen.training.metrics import MetricsWriter
from roamgen.training.plans import Stage, TrainPlan

SIGMA_FLOOR = 0.02


def _sample_sigmas(rng: CounterRng, it: int, batch: int, sigma_max: float) -> torch.Tensor:
    u = rng.rand((batch,), chunk=it, name="sigma")
    lo, hi = math.log(SIGMA_FLOOR), math.log(sigma_max)
    return torch.exp(lo + u * (hi - lo))


def _loss_weight(sigmas: torch.Tensor, sigma_data: float = 0.5) -> torch.Tensor:
    """Equalizes the x0 objective across noise levels (small sigmas would
    otherwise contribute trivially easy, vanishing targets)."""
    return (sigmas ** 2 + sigma_data ** 2) / (sigmas * sigma_data) ** 2


def _batch_v2v(dataset: PairedEpisodeDataset, cfg, rng: CounterRng, it: int, batch: int):
    refs, warps, targets, hists, tags = [], [], [], [], []
    for b in range(batch):
        ref, tgt = dataset.pair(rng.integers(0, len(dataset), chunk=it, step=b, name="pair"))
        i = rng.integers(0, tgt.num_chunks, chunk=it, step=b, name="chunk")
        r, w, t = v2v_chunk_inputs(ref, tgt, i, cfg)
        refs.append(r)
        warps.append(w)
        targets.append(t)
        if i > 0:
            hists.append(encode_frames(tgt.chunk_frames(i - 1), cfg))
        else:
            hists.append(torch.zeros(cfg.tokens_per_block, cfg.token_dim))
        tags.append(tgt.scene_tag)
    return (torch.stack(refs), torch.stack(warps), torch.stack(targets),
            torch.stack(hists), torch.tensor(tags, dtype=torch.long))


def _batch_tag_only(dataset: PairedEpisodeDataset, cfg, rng: CounterRng, it: int, batch: int):
    targets, tags = [], []
    for b in range(batch):
        _, tgt = dataset.pair(rng.integers(0, len(dataset), chunk=it, step=b, name="pair"))
        i = rng.integers(0, tgt.num_chunks, chunk=it, step=b, name="chunk")
        targets.append(encode_frames(tgt.chunk_frames(i), cfg))
        tags.append(tgt.scene_tag)
    return torch.stack(targets), torch.tensor(tags, dtype=torch.long)


def train_teacher(model: Denoiser, dataset: PairedEpisodeDataset, plan: TrainPlan, *,
                  conditioned: bool = True, iterations: int = 1000, batch: int = 8,
                  seed: int = 0, schedule: Optional[NoiseSchedule] = None,
                  metrics: Optional[MetricsWriter] = None,
                  log_every: int = 50) -> List[float]:
    """Train one teacher in place; returns the per-iteration loss curve."""
    if plan.stage is not Stage.TEACHER:
        raise ValueError("train_teacher requires a teacher-stage plan")
    cfg = model.config
    schedule = schedule or NoiseSchedule.geometric(count=8)
    opt = torch.optim.Adam(model.parameters(), lr=plan.teacher_lr)
    rng = CounterRng(seed)
    losses: List[float] = []
    model.train()
    for it in range(iterations):
        if conditioned:
            refs, warps, targets, hists, tags = _batch_v2v(dataset, cfg, rng, it, batch)
            cache = STCache(cfg)
            cache.set_reference(model.encode_block_kv(refs, tag=tags))
            cache.append_history(model.encode_block_kv(hists, tag=tags), chunk_index=0)
            cond = ChunkConditions(cache_view=cache.view(), warp_tokens=warps, tag=tags)
        else:
            targets, tags = _batch_tag_only(dataset, cfg, rng, it, batch)
            cond = ChunkConditions(tag=tags)
        sigmas = _sample_sigmas(rng, it, batch, schedule.sigma_max)
        noise = rng.randn(targets.shape, chunk=it, name="noise")
        noisy = targets + sigmas[:, None, None] * noise
        pred = model(noisy, sigmas, cond)
        weight = _loss_weight(sigmas)[:, None, None]
        loss = torch.mean(weight * (pred - targets) ** 2)
        opt.zero_grad(set_to_none=True)
        loss.backward()
        opt.step()
        losses.append(float(loss.detach()))
        if metrics and (it % log_every == 0 or it == iterations - 1):
            metrics.write(stage="teacher", conditioned=conditioned, iteration=it,
                          loss=losses[-1], lr=plan.teacher_lr)
    model.eval()
    return losses
