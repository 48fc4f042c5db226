"""Training objectives and schedules: teacher pretraining, multi-condition
causal initialization, and dual-teacher distribution matching distillation."""

from roamgen.training.plans import Stage, TrainPlan, validate_transition
from roamgen.training.scores import AnalyticGaussianScore, Role, ScoreModel
from roamgen.training.dmd import (
    DistillLoss,
    TeacherDivergence,
    dmd_gradient,
    fake_score_update,
)
from roamgen.training.datasets import PairedEpisodeDataset, gaussian_blur
from roamgen.training.teacher import train_teacher
from roamgen.training.causal_init import causal_init
from roamgen.training.jdmd import JdmdState, jdmd_step, run_jdmd
from roamgen.training.gaussian_toy import GaussianStudent, run_dmd_regression

__all__ = [
    "Stage", "TrainPlan", "validate_transition",
    "Role", "ScoreModel", "AnalyticGaussianScore",
    "DistillLoss", "TeacherDivergence", "dmd_gradient", "fake_score_update",
    "PairedEpisodeDataset", "gaussian_blur",
    "train_teacher", "causal_init", "JdmdState", "jdmd_step", "run_jdmd",
    "GaussianStudent", "run_dmd_regression",
]
