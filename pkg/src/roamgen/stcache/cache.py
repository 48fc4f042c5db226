"""Per-layer reference + sliding-window history KV store.

Entries hold pre-rotary keys/values and are always detached: the cache is
a constant from autograd's point of view, which is exactly the gradient
scope the chunk-wise training replay assumes. Eviction is strictly
oldest-first; per-layer occupancy never exceeds W history entries plus the
reference slot.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import torch

from roamgen.model.config import DenoiserConfig


@dataclass
class CacheEntry:
    k: torch.Tensor            # (B, T, heads, head_dim), pre-rotary
    v: torch.Tensor
    chunk_index: int
    rng_cursor: Optional[tuple] = None


class STCache:
    def __init__(self, config: DenoiserConfig):
        self.config = config
        self.capacity = config.history_window
        self._reference: List[Optional[Tuple[torch.Tensor, torch.Tensor]]] = \
            [None] * config.layers
        self._history: List[deque] = [deque() for _ in range(config.layers)]

    def _check_shape(self, k: torch.Tensor):
        cfg = self.config
        if k.dim() != 4 or k.shape[-3:] != (cfg.tokens_per_block, cfg.heads, cfg.head_dim):
            raise ValueError(
                f"kv shape {tuple(k.shape)} does not match "
                f"(B, {cfg.tokens_per_block}, {cfg.heads}, {cfg.head_dim})")

    def set_reference(self, kvs: Sequence[Tuple[torch.Tensor, torch.Tensor]]) -> None:
        """Overwrite the reference anchor slot; history is untouched."""
        if len(kvs) != self.config.layers:
            raise ValueError("one (k, v) per layer required")
        for k, _ in kvs:
            self._check_shape(k)
        self._reference = [(k.detach(), v.detach()) for k, v in kvs]

    def append_history(self, kvs: Sequence[Tuple[torch.Tensor, torch.Tensor]],
                       chunk_index: int, rng_cursor: Optional[tuple] = None):
        """Append one block's KV; returns the evicted entries or None."""
        if len(kvs) != self.config.layers:
            raise ValueError("one (k, v) per layer required")
        newest = self.newest_chunk_index()
        if newest is not None and chunk_index <= newest:
            raise ValueError(f"chunk index {chunk_index} not greater than stored {newest}")
        for k, _ in kvs:
            self._check_shape(k)
        evicted = None
        for layer, (k, v) in enumerate(kvs):
            self._history[layer].append(
                CacheEntry(k.detach(), v.detach(), chunk_index, rng_cursor))
            if len(self._history[layer]) > self.capacity:
                popped = self._history[layer].popleft()
                if layer == 0:
                    evicted = [popped]
                elif evicted is not None:
                    evicted.append(popped)
        return evicted

    def newest_chunk_index(self) -> Optional[int]:
        h = self._history[0]
        return h[-1].chunk_index if h else None

    def entry_count(self, layer: int = 0) -> int:
        """History entries plus the reference slot, for one layer."""
        return len(self._history[layer]) + (1 if self._reference[layer] is not None else 0)

    def reference(self, layer: int):
        return self._reference[layer]

    def history_entries(self, layer: int) -> List[CacheEntry]:
        return list(self._history[layer])

    def view(self) -> list:
        """Read view for the denoiser: newest history entry has age 1."""
        out = []
        for layer in range(self.config.layers):
            hist = list(self._history[layer])
            n = len(hist)
            out.append({
                "reference": self._reference[layer],
                "history": [(e.k, e.v, n - i) for i, e in enumerate(hist)],
            })
        return out

    def clear_history(self) -> None:
        for h in self._history:
            h.clear()

    def snapshot(self) -> dict:
        """Deep copy of the cache state (detached clones)."""
        return {
            "reference": [None if r is None else (r[0].clone(), r[1].clone())
                          for r in self._reference],
            "history": [[CacheEntry(e.k.clone(), e.v.clone(), e.chunk_index, e.rng_cursor)
                         for e in h] for h in self._history],
        }

    def restore(self, snap: dict) -> None:
        self._reference = [None if r is None else (r[0].clone(), r[1].clone())
                           for r in snap["reference"]]
        self._history = [deque(CacheEntry(e.k.clone(), e.v.clone(), e.chunk_index,
                                          e.rng_cursor) for e in h)
                         for h in snap["history"]]

    def dump(self) -> dict:
        """JSON-able per-layer entry metadata for debugging."""
        return {
            "capacity": self.capacity,
            "layers": [
                {
                    "reference": self._reference[layer] is not None,
                    "history": [
                        {"chunk_index": e.chunk_index,
                         "tokens": int(e.k.shape[-3]),
                         "rng_cursor": list(e.rng_cursor) if e.rng_cursor else None}
                        for e in self._history[layer]
                    ],
                }
                for layer in range(self.config.layers)
            ],
        }
