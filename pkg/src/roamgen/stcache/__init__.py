"""Constant-memory KV store and two-stage chunk-wise recomputation."""

from roamgen.stcache.cache import CacheEntry, STCache
from roamgen.stcache.rng import CounterRng
from roamgen.stcache.replay import (
    ActivationMeter,
    ChunkRollout,
    RecomputePlan,
    ReplayDivergence,
    ReplayResult,
    plan_and_replay,
)

__all__ = [
    "STCache", "CacheEntry", "CounterRng",
    "ActivationMeter", "ChunkRollout", "RecomputePlan",
    "ReplayDivergence", "ReplayResult", "plan_and_replay",
]
