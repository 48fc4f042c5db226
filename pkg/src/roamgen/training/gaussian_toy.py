"""Analytic Gaussian distillation harness.

The student is an explicit Gaussian sampler (mean + log-std), the teacher
an analytic score, and the fake score tracks the student's own closed-form
Gaussian, so the matching gradient and its dynamics are exactly known.
Used to pin the distillation machinery against closed-form oracles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence

import torch
import torch.nn as nn

from roamgen.stcache.rng import CounterRng
from roamgen.training.dmd import dmd_gradient
from roamgen.training.scores import AnalyticGaussianScore


class GaussianStudent(nn.Module):
    def __init__(self, dim: int, init_mean, init_log_std: float = 0.0):
        super().__init__()
        mean = torch.as_tensor(init_mean, dtype=torch.float64).reshape(dim)
        self.mean = nn.Parameter(mean.clone())
        self.log_std = nn.Parameter(torch.full((dim,), float(init_log_std),
                                               dtype=torch.float64))

    def sample(self, eps: torch.Tensor) -> torch.Tensor:
        return eps * torch.exp(self.log_std) + self.mean

    def tracked_score(self) -> AnalyticGaussianScore:
        """The student's own distribution as an ideal fake score."""
        return AnalyticGaussianScore(self.mean.detach().clone(),
                                     torch.exp(self.log_std.detach()).clone())


@dataclass
class RegressionResult:
    mean_history: List[torch.Tensor] = field(default_factory=list)

    @property
    def final_mean(self) -> torch.Tensor:
        return self.mean_history[-1]


def run_dmd_regression(dim: int, real_mean, init_mean, *, steps: int = 2000,
                       batch: int = 256, lr: float = 0.02, seed: int = 0,
                       sigmas: Sequence[float] = (2.0, 1.0, 0.4, 0.1),
                       real_std: float = 1.0) -> RegressionResult:
    """Distill a Gaussian student toward an analytic teacher via the
    matching gradient; returns the mean trajectory."""
    student = GaussianStudent(dim, init_mean)
    real = AnalyticGaussianScore(torch.as_tensor(real_mean, dtype=torch.float64),
                                 torch.tensor(float(real_std), dtype=torch.float64))
    opt = torch.optim.Adam(student.parameters(), lr=lr)
    rng = CounterRng(seed)
    result = RegressionResult()
    for it in range(steps):
        eps = rng.randn((batch, dim), chunk=it, name="eps", dtype=torch.float64)
        x_hat = student.sample(eps)
        sigma_t = sigmas[rng.integers(0, len(sigmas), chunk=it, name="sigma")]
        noise = rng.randn((batch, dim), chunk=it, name="noise", dtype=torch.float64)
        grad = dmd_gradient(x_hat, sigma_t, real, student.tracked_score(), noise=noise)
        opt.zero_grad(set_to_none=True)
        (x_hat * grad).sum().div(batch).backward()
        opt.step()
        result.mean_history.append(student.mean.detach().clone())
    return result


class TinyScoreNet(nn.Module):
    """Small MLP x0-predictor for low-dimensional score matching tests."""

    def __init__(self, dim: int, hidden: int = 64):
        super().__init__()
        self.net = nn.Sequential(nn.Linear(dim + 2, hidden), nn.SiLU(),
                                 nn.Linear(hidden, hidden), nn.SiLU(),
                                 nn.Linear(hidden, dim))

    def forward(self, x_t: torch.Tensor, sigma, cond=None) -> torch.Tensor:
        sigma = torch.as_tensor(sigma, dtype=x_t.dtype, device=x_t.device)
        sigma = sigma.expand(x_t.shape[0]) if sigma.dim() == 0 else sigma
        feats = torch.cat([x_t, sigma[:, None], torch.log1p(sigma)[:, None]], dim=-1)
        return self.net(feats)
