"""Two-stage chunk-wise backpropagation.

Stage 1 runs the whole generation without gradient tracking, recording a
state snapshot before each chunk and the chunk outputs. The terminal
gradient (e.g. a distribution-matching gradient on the outputs) is then
distributed by replaying one chunk at a time under autograd from its
snapshot, so the peak differentiable state is one chunk's activations.
Cache entries are detached at write time (see stcache.cache), so a
replayed chunk treats earlier chunks as constants while its own denoising
and cache-construction passes stay fully differentiable.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Callable, List, Optional, Protocol, Sequence

import torch


class ReplayDivergence(RuntimeError):
    """Stage-2 replay failed to reproduce the stage-1 output: the rollout
    is not deterministic given its recorded RNG cursors."""


class ChunkRollout(Protocol):
    """Deterministic chunked generation driven by counter-addressed RNG."""

    num_chunks: int

    def reset(self) -> None: ...
    def snapshot(self) -> Any: ...
    def restore(self, snap: Any) -> None: ...
    def run_chunk(self, j: int) -> torch.Tensor: ...


class ActivationMeter:
    """Counts tensor elements saved for backward, per release scope.

    Uses autograd saved-tensor pack hooks, so it measures exactly the
    differentiable intermediate state a scope keeps alive; scope exit
    models the graph being freed by backward().
    """

    def __init__(self):
        self.current = 0
        self.peak = 0

    def reset(self):
        self.current = 0
        self.peak = 0

    @contextmanager
    def scope(self):
        def pack(t):
            self.current += t.numel()
            if self.current > self.peak:
                self.peak = self.current
            return t

        with torch.autograd.graph.saved_tensors_hooks(pack, lambda t: t):
            try:
                yield self
            finally:
                self.current = 0


@dataclass
class ChunkRecord:
    chunk_index: int
    rng_cursor: Optional[tuple]
    output_norm: float


@dataclass
class RecomputePlan:
    total_chunks: int
    records: List[ChunkRecord] = field(default_factory=list)


@dataclass
class ReplayResult:
    outputs: List[torch.Tensor]
    plan: RecomputePlan
    chunk_grad_norms: List[float]
    surrogate_total: float


def plan_and_replay(rollout: ChunkRollout,
                    terminal_grads: Callable[[Sequence[torch.Tensor]], Sequence[Optional[torch.Tensor]]],
                    *,
                    meter: Optional[ActivationMeter] = None,
                    divergence_tol: float = 1e-5,
                    rng_cursor_of: Optional[Callable[[int], tuple]] = None) -> ReplayResult:
    """Run stage 1 (gradient-free) then stage 2 (per-chunk replay backward).

    terminal_grads maps the stage-1 outputs to one gradient tensor per
    chunk (None to skip a chunk). Parameter gradients accumulate into
    .grad of whatever the rollout's model exposes, exactly as a full-graph
    backward over the same detached-cache semantics would produce.
    """
    n = rollout.num_chunks
    snaps: List[Any] = []
    outputs: List[torch.Tensor] = []
    with torch.no_grad():
        rollout.reset()
        for j in range(n):
            snaps.append(rollout.snapshot())
            outputs.append(rollout.run_chunk(j))
    plan = RecomputePlan(total_chunks=n, records=[
        ChunkRecord(chunk_index=j,
                    rng_cursor=rng_cursor_of(j) if rng_cursor_of else None,
                    output_norm=float(outputs[j].norm()))
        for j in range(n)
    ])

    grads = list(terminal_grads(outputs))
    if len(grads) != n:
        raise ValueError(f"terminal_grads returned {len(grads)} entries for {n} chunks")

    norms: List[float] = []
    surrogate_total = 0.0
    for j in range(n):
        if grads[j] is None:
            norms.append(0.0)
            continue
        rollout.restore(snaps[j])
        ctx = meter.scope() if meter is not None else _null()
        with ctx, torch.enable_grad():
            out = rollout.run_chunk(j)
            drift = float((out.detach() - outputs[j]).abs().max())
            if drift > divergence_tol:
                raise ReplayDivergence(
                    f"chunk {j} replay drifted {drift:.3e} > {divergence_tol:.1e}")
            surrogate = (out * grads[j].detach()).sum()
            surrogate.backward()
        surrogate_total += float(surrogate.detach())
        norms.append(float(grads[j].norm()))
    return ReplayResult(outputs=outputs, plan=plan, chunk_grad_norms=norms,
                        surrogate_total=surrogate_total)


@contextmanager
def _null():
    yield
