"""Streaming autoregressive generation: rollouts, live sessions, evaluation."""

from roamgen.engine.rollout import ChunkSpec, GenerationRollout
from roamgen.engine.session import PointCloudMemory, Session, select_reference
from roamgen.engine.evaluate import evaluate_run, masked_psnr, high_frequency_energy

__all__ = [
    "ChunkSpec", "GenerationRollout",
    "Session", "PointCloudMemory", "select_reference",
    "evaluate_run", "masked_psnr", "high_frequency_energy",
]
