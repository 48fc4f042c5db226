"""Distribution-matching distillation primitives.

The student gradient with respect to its output x_hat is the negated score
difference -(s_real - s_fake) evaluated at the noised output; the caller
chains it through d x_hat / d theta (here via chunk-wise replay). The
reported loss value is mean(g^2), the squared-error surrogate whose
gradient is g.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch


class TeacherDivergence(RuntimeError):
    """A score network returned non-finite values."""


@dataclass(frozen=True)
class DistillLoss:
    vis: float
    ctrl: float
    lambda_ctrl: float

    @property
    def total(self) -> float:
        return self.vis + self.lambda_ctrl * self.ctrl

    def to_dict(self) -> dict:
        return {"vis": self.vis, "ctrl": self.ctrl,
                "lambda_ctrl": self.lambda_ctrl, "total": self.total}


def dmd_gradient(x_hat: torch.Tensor, sigma_t: float, real, fake, *,
                 noise: torch.Tensor, cond_real=None, cond_fake=None) -> torch.Tensor:
    """Gradient of the matching objective w.r.t. the student output.

    x_hat is noised to level sigma_t with the supplied (recorded) noise;
    both score networks are evaluated there without gradient tracking.
    """
    if not torch.isfinite(x_hat).all():
        raise TeacherDivergence("student output is non-finite")
    x_t = x_hat.detach() + sigma_t * noise
    with torch.no_grad():
        s_real = real.score(x_t, sigma_t, cond_real)
        s_fake = fake.score(x_t, sigma_t, cond_fake)
    grad = -(s_real - s_fake)
    if not torch.isfinite(grad).all():
        raise TeacherDivergence(f"non-finite score difference at sigma={sigma_t}")
    return grad


def fake_score_update(fake, samples: torch.Tensor, lr: float = 8.0e-7, *,
                      noise: torch.Tensor, sigma_t: float, cond=None) -> float:
    """One denoising-score-matching step of the fake net on student samples."""
    if samples.numel() == 0 or samples.shape[0] == 0:
        raise ValueError("empty sample batch")
    opt = fake.ensure_optimizer(lr)
    x0 = samples.detach()
    x_t = x0 + sigma_t * noise
    pred = fake.predict_x0(x_t, sigma_t, cond)
    loss = torch.mean((pred - x0) ** 2)
    opt.zero_grad(set_to_none=True)
    loss.backward()
    opt.step()
    return float(loss.detach())
