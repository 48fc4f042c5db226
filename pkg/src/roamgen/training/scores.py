"""Score networks and analytic score oracles.

With x0-prediction denoisers and variance-exploding noising
z = x + sigma * eps, the score of the noised distribution follows from the
posterior mean: score(z, sigma) = (x0_hat(z, sigma) - z) / sigma^2. The
analytic Gaussian variant implements the same interface in closed form and
anchors the distillation tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

import torch

from roamgen.engine.rollout import ChunkSpec
from roamgen.model.config import NoiseSchedule
from roamgen.model.denoiser import ChunkConditions, Denoiser
from roamgen.stcache.cache import STCache


class Role(str, Enum):
    REAL = "real"            # perceptual teacher, frozen
    SYNTHETIC = "synthetic"  # motion/control teacher, frozen
    FAKE = "fake"            # student-tracking score network, trainable


class ScoreModel:
    def __init__(self, role: Role, net: Denoiser, schedule: NoiseSchedule,
                 conditioned: bool = True):
        """conditioned=False is the tag-only mode: the net scores chunks
        without cache or warp inputs (the text-to-video-shaped teacher)."""
        self.role = Role(role)
        self.net = net
        self.schedule = schedule
        self.conditioned = conditioned
        self._optimizer: Optional[torch.optim.Optimizer] = None
        if self.role is not Role.FAKE:
            self.net.requires_grad_(False)
            self.net.eval()

    def parameters_vector(self) -> torch.Tensor:
        return torch.cat([p.detach().reshape(-1) for p in self.net.parameters()])

    def ensure_optimizer(self, lr: float) -> torch.optim.Optimizer:
        if self.role is not Role.FAKE:
            raise ValueError("only the fake score network trains")
        if self._optimizer is None:
            self._optimizer = torch.optim.Adam(self.net.parameters(), lr=lr)
        if self._optimizer.param_groups[0]["lr"] != lr:
            raise ValueError("fake-score optimizer already built at a different lr")
        return self._optimizer

    def condition_for(self, spec: ChunkSpec, history: List[torch.Tensor],
                      chunk_index: int) -> ChunkConditions:
        """Conditioning for one rollout chunk, encoded with this net's own
        weights (cache entries are weight-dependent)."""
        if not self.conditioned:
            return ChunkConditions(tag=spec.tag)
        cfg = self.net.config
        cache = STCache(cfg)
        batch = history[0].shape[0] if history else (
            spec.ref_tokens.shape[0] if spec.ref_tokens is not None else 1)
        ref = spec.ref_tokens
        if ref is None:
            ref = torch.zeros(batch, cfg.tokens_per_block, cfg.token_dim,
                              dtype=self.net.dtype, device=self.net.device)
        cache.set_reference(self.net.encode_block_kv(ref.to(self.net.dtype), tag=spec.tag))
        window = history[-cfg.history_window:]
        base = chunk_index - len(window)
        for off, block in enumerate(window):
            cache.append_history(
                self.net.encode_block_kv(block.to(self.net.dtype), tag=spec.tag),
                chunk_index=base + off)
        return ChunkConditions(cache_view=cache.view(),
                               warp_tokens=spec.warp_tokens, tag=spec.tag)

    def predict_x0(self, x_t: torch.Tensor, sigma: float,
                   cond: Optional[ChunkConditions] = None) -> torch.Tensor:
        return self.net(x_t, sigma, cond)

    def score(self, x_t: torch.Tensor, sigma: float,
              cond: Optional[ChunkConditions] = None) -> torch.Tensor:
        return (self.predict_x0(x_t, sigma, cond) - x_t) / (sigma ** 2)


@dataclass
class AnalyticGaussianScore:
    """Closed-form score of N(mean, std^2 I) noised at level sigma."""

    mean: torch.Tensor
    std: torch.Tensor

    def __post_init__(self):
        self.mean = torch.as_tensor(self.mean, dtype=torch.float64)
        self.std = torch.as_tensor(self.std, dtype=torch.float64)

    def score(self, x_t: torch.Tensor, sigma: float, cond=None) -> torch.Tensor:
        var = self.std ** 2 + sigma ** 2
        return -(x_t - self.mean) / var

    def predict_x0(self, x_t: torch.Tensor, sigma: float, cond=None) -> torch.Tensor:
        return x_t + (sigma ** 2) * self.score(x_t, sigma)
