"""Multi-condition causal initialization.

Rather than a static causal mask, the student rehearses generation: it
runs the multi-step denoising schedule chunk by chunk over ground-truth
episodes, feeds each chunk's own output into the cache for the next one,
and regresses every chunk onto the ground truth. Iterations alternate the
fully-conditioned mode with the tag-only mode so the shared weights serve
both tasks. History blocks enter the cache with geometric channels
structurally zero (the encode pass has none).
"""

from __future__ import annotations

from typing import List, Optional

import torch

from roamgen.engine.conditions import v2v_chunk_inputs
from roamgen.engine.rollout import ChunkSpec, GenerationRollout
from roamgen.model.config import NoiseSchedule
from roamgen.model.denoiser import Denoiser
from roamgen.stcache.rng import CounterRng
from roamgen.training.datasets import PairedEpisodeDataset
from roamgen.training.metrics import MetricsWriter
from roamgen.training.plans import Stage, TrainPlan


def build_sequence_conditions(dataset: PairedEpisodeDataset, cfg, rng: CounterRng,
                              it: int, batch: int, tag_only: bool):
    """Batched per-chunk ChunkSpecs plus ground-truth targets for one pass."""
    num_chunks = dataset.num_chunks
    refs = [[] for _ in range(num_chunks)]
    warps = [[] for _ in range(num_chunks)]
    targets = [[] for _ in range(num_chunks)]
    tags = []
    for b in range(batch):
        ref, tgt = dataset.pair(rng.integers(0, len(dataset), chunk=it, step=b, name="pair"))
        tags.append(tgt.scene_tag)
        for j in range(num_chunks):
            r, w, t = v2v_chunk_inputs(ref, tgt, j, cfg)
            refs[j].append(r)
            warps[j].append(w)
            targets[j].append(t)
    tag_tensor = torch.tensor(tags, dtype=torch.long)
    specs = []
    gts = []
    for j in range(num_chunks):
        if tag_only:
            specs.append(ChunkSpec(ref_tokens=None, warp_tokens=None, tag=tag_tensor))
        else:
            specs.append(ChunkSpec(ref_tokens=torch.stack(refs[j]),
                                   warp_tokens=torch.stack(warps[j]),
                                   tag=tag_tensor))
        gts.append(torch.stack(targets[j]))
    return specs, gts


def causal_init(student: Denoiser, dataset: PairedEpisodeDataset, plan: TrainPlan, *,
                schedule: Optional[NoiseSchedule] = None, iterations: int = 800,
                batch: int = 4, seed: int = 0, metrics: Optional[MetricsWriter] = None,
                log_every: int = 25) -> List[float]:
    """Rehearsal training in place; returns the per-iteration loss curve."""
    if plan.stage is not Stage.INIT:
        raise ValueError("causal_init requires an init-stage plan")
    schedule = schedule or NoiseSchedule.geometric(count=8)
    opt = torch.optim.Adam(student.parameters(), lr=plan.teacher_lr)
    rng = CounterRng(seed)
    losses: List[float] = []
    student.train()
    for it in range(iterations):
        tag_only = (it // plan.alternation_period) % 2 == 1
        specs, gts = build_sequence_conditions(dataset, student.config, rng, it,
                                               batch, tag_only)
        rollout = GenerationRollout(student, schedule, specs,
                                    rng.spawn(f"init/{it}"), batch=batch)
        rollout.reset()
        opt.zero_grad(set_to_none=True)
        total = 0.0
        for j in range(rollout.num_chunks):
            out = rollout.run_chunk(j)
            loss_j = torch.mean((out - gts[j]) ** 2) / rollout.num_chunks
            loss_j.backward()
            total += float(loss_j.detach())
        opt.step()
        losses.append(total)
        if metrics and (it % log_every == 0 or it == iterations - 1):
            metrics.write(stage="init", iteration=it, loss=total,
                          tag_only=tag_only, lr=plan.teacher_lr)
    student.eval()
    return losses
