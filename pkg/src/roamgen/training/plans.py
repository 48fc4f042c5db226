"""Training stages and their learning rates.

The stage learning rates are the published ones this implementation
follows: 2e-5 for teacher training and the initialization phase, then
4.0e-6 for the student and 8.0e-7 for the fake score network during joint
distillation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Stage(str, Enum):
    TEACHER = "teacher"
    INIT = "init"
    JDMD = "jdmd"

    @property
    def order(self) -> int:
        return {"teacher": 0, "init": 1, "jdmd": 2}[self.value]


def validate_transition(current: Stage | str | None, requested: Stage | str) -> Stage:
    """Stages move forward only: teacher -> init -> jdmd."""
    requested = Stage(requested)
    if current is None or current == "untrained":
        return requested
    current = Stage(current)
    if requested.order < current.order:
        raise ValueError(f"stage transition {current.value} -> {requested.value} "
                         "moves backwards")
    return requested


@dataclass(frozen=True)
class TrainPlan:
    stage: Stage = Stage.TEACHER
    teacher_lr: float = 2e-5
    student_lr: float = 4.0e-6
    fake_lr: float = 8.0e-7
    alternation_period: int = 1      # iterations per task before switching
    lambda_ctrl: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "stage", Stage(self.stage))
        for name in ("teacher_lr", "student_lr", "fake_lr"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.alternation_period < 1:
            raise ValueError("alternation period must be >= 1")
        if self.lambda_ctrl < 0:
            raise ValueError("lambda_ctrl must be >= 0")
