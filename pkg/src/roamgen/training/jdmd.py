"""Joint dual-teacher distillation.

Each iteration activates one task on the shared student weights:

* rerendering (control) task: full conditions, scored against the motion
  teacher -> control loss;
* tag-only (fidelity) task: reference/warp inputs zeroed, scored against
  the perceptual teacher -> vision loss.

The student runs autoregressively (cache included); the matching gradient
on each chunk's output is distributed by chunk-wise replay, then the fake
score network takes denoising-score-matching steps on the student's own
samples. Teachers stay frozen throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import torch

from roamgen.engine.rollout import ChunkSpec, GenerationRollout
from roamgen.model.config import NoiseSchedule
from roamgen.model.denoiser import Denoiser
from roamgen.stcache.replay import plan_and_replay
from roamgen.stcache.rng import CounterRng
from roamgen.training.causal_init import build_sequence_conditions
from roamgen.training.datasets import PairedEpisodeDataset
from roamgen.training.dmd import DistillLoss, dmd_gradient, fake_score_update
from roamgen.training.metrics import MetricsWriter
from roamgen.training.plans import Stage, TrainPlan
from roamgen.training.scores import Role, ScoreModel


@dataclass
class JdmdState:
    student: Denoiser
    fake: ScoreModel
    plan: TrainPlan
    student_schedule: NoiseSchedule = field(default_factory=NoiseSchedule)
    teacher_schedule: NoiseSchedule = field(default_factory=lambda: NoiseSchedule.geometric(count=8))
    seed: int = 0
    iteration: int = 0
    # The tag-only teacher is only informative about fine detail where it
    # denoises rather than generates, so the fidelity task draws its noise
    # levels from the lower half of the ladder; the control task uses all.
    fidelity_low_sigma: bool = True

    def __post_init__(self):
        if self.fake.role is not Role.FAKE:
            raise ValueError("state.fake must have the fake role")
        self.rng = CounterRng(self.seed)
        self.student_opt = torch.optim.Adam(self.student.parameters(),
                                            lr=self.plan.student_lr)


def jdmd_step(state: JdmdState, real: ScoreModel, synthetic: ScoreModel,
              specs: List[ChunkSpec], task: str, batch: int = 1) -> DistillLoss:
    """One alternation step on pre-built per-chunk conditions."""
    if task not in ("v2v", "t2v"):
        raise ValueError("task must be v2v or t2v")
    teacher = synthetic if task == "v2v" else real
    if task == "v2v" and any(s.warp_tokens is None for s in specs):
        raise ValueError("v2v batches must carry warp conditions")
    if task == "t2v" and any(s.warp_tokens is not None or s.ref_tokens is not None
                             for s in specs):
        raise ValueError("t2v batches must have reference/warp inputs zeroed")

    plan = state.plan
    rng = state.rng.spawn(f"jdmd/{state.iteration}")
    rollout = GenerationRollout(state.student, state.student_schedule, specs,
                                rng, batch=batch)
    scale = plan.lambda_ctrl if task == "v2v" else 1.0
    raw_sq: List[float] = []
    dmd_records = []

    sigma_lo = 0
    if task == "t2v" and state.fidelity_low_sigma:
        sigma_lo = state.teacher_schedule.count // 2

    def terminal_grads(outputs):
        grads = []
        for j, out in enumerate(outputs):
            idx = rng.integers(sigma_lo, state.teacher_schedule.count,
                               chunk=j, name="dmd_sigma")
            sigma_t = state.teacher_schedule.sigmas[idx]
            noise = rng.randn(tuple(out.shape), chunk=j, name="dmd_noise")
            history = [o for o in outputs[:j]]
            cond_teacher = teacher.condition_for(specs[j], history, j)
            cond_fake = state.fake.condition_for(specs[j], history, j)
            g = dmd_gradient(out, sigma_t, teacher, state.fake, noise=noise,
                             cond_real=cond_teacher, cond_fake=cond_fake)
            raw_sq.append(float((g ** 2).mean()))
            # Per-chunk magnitude normalization: the raw score difference
            # grows like 1/sigma^2 at small noise, which would let a single
            # low-sigma draw dominate an update; direction is preserved.
            g = g / (g.abs().mean() + 1e-8)
            dmd_records.append((sigma_t, cond_fake))
            grads.append(g * (scale / g.numel()))
        return grads

    state.student_opt.zero_grad(set_to_none=True)
    result = plan_and_replay(rollout, terminal_grads)
    if scale != 0.0:
        state.student_opt.step()

    for j, out in enumerate(result.outputs):
        sigma_t, cond_fake = dmd_records[j]
        noise = rng.randn(tuple(out.shape), chunk=j, name="fake_noise")
        fake_score_update(state.fake, out, plan.fake_lr, noise=noise,
                          sigma_t=sigma_t, cond=cond_fake)

    value = float(sum(raw_sq) / max(len(raw_sq), 1))
    state.iteration += 1
    if task == "v2v":
        return DistillLoss(vis=0.0, ctrl=value, lambda_ctrl=plan.lambda_ctrl)
    return DistillLoss(vis=value, ctrl=0.0, lambda_ctrl=plan.lambda_ctrl)


def run_jdmd(state: JdmdState, real: ScoreModel, synthetic: ScoreModel,
             control_data: PairedEpisodeDataset,
             fidelity_data: Optional[PairedEpisodeDataset] = None, *,
             iterations: int = 400, batch: int = 2,
             metrics: Optional[MetricsWriter] = None, log_every: int = 20,
             tasks: str = "alternate") -> List[DistillLoss]:
    """Joint distillation; tasks is 'alternate', 'v2v' or 't2v' (the
    single-task modes disable alternation). Returns per-iteration losses."""
    if state.plan.stage is not Stage.JDMD:
        raise ValueError("run_jdmd requires a jdmd-stage plan")
    if tasks not in ("alternate", "v2v", "t2v"):
        raise ValueError("tasks must be alternate|v2v|t2v")
    fidelity_data = fidelity_data or control_data
    cfg = state.student.config
    losses: List[DistillLoss] = []
    for it in range(iterations):
        if tasks == "alternate":
            v2v = (it // state.plan.alternation_period) % 2 == 0
        else:
            v2v = tasks == "v2v"
        data = control_data if v2v else fidelity_data
        specs, _ = build_sequence_conditions(
            data, cfg, state.rng.spawn(f"jdmd-data/{it}"), it, batch,
            tag_only=not v2v)
        loss = jdmd_step(state, real, synthetic, specs,
                         "v2v" if v2v else "t2v", batch=batch)
        losses.append(loss)
        if metrics and (it % log_every == 0 or it == iterations - 1):
            metrics.write(stage="jdmd", iteration=it, task="v2v" if v2v else "t2v",
                          **loss.to_dict(),
                          student_lr=state.plan.student_lr,
                          fake_lr=state.plan.fake_lr)
    return losses
