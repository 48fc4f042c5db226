"""Counter-addressed noise streams.

Every draw is a pure function of (seed, chunk, step, name), so replaying
any chunk needs no generator state copying: the address is the state.
"""

from __future__ import annotations

import hashlib

import torch


class CounterRng:
    def __init__(self, seed: int):
        self.seed = int(seed)

    def _derive(self, chunk: int, step: int, name: str) -> int:
        digest = hashlib.blake2b(
            f"{self.seed}:{chunk}:{step}:{name}".encode(), digest_size=8).digest()
        return int.from_bytes(digest, "little")

    def randn(self, shape, *, chunk: int, step: int = 0, name: str = "noise",
              dtype=torch.float32, device="cpu") -> torch.Tensor:
        gen = torch.Generator(device="cpu")
        gen.manual_seed(self._derive(chunk, step, name))
        return torch.randn(*shape, generator=gen, dtype=dtype).to(device)

    def integers(self, low: int, high: int, *, chunk: int, step: int = 0,
                 name: str = "int") -> int:
        gen = torch.Generator(device="cpu")
        gen.manual_seed(self._derive(chunk, step, name))
        return int(torch.randint(low, high, (1,), generator=gen).item())

    def uniform(self, *, chunk: int, step: int = 0, name: str = "uniform") -> float:
        gen = torch.Generator(device="cpu")
        gen.manual_seed(self._derive(chunk, step, name))
        return float(torch.rand(1, generator=gen).item())

    def rand(self, shape, *, chunk: int, step: int = 0, name: str = "uniform",
             dtype=torch.float32, device="cpu") -> torch.Tensor:
        gen = torch.Generator(device="cpu")
        gen.manual_seed(self._derive(chunk, step, name))
        return torch.rand(*shape, generator=gen, dtype=dtype).to(device)

    def spawn(self, label: str) -> "CounterRng":
        """Independent child stream; used to give each training iteration
        its own chunk-addressed space."""
        digest = hashlib.blake2b(f"{self.seed}/{label}".encode(), digest_size=8).digest()
        return CounterRng(int.from_bytes(digest, "little"))

    def cursor(self, chunk: int, step: int = 0, name: str = "noise") -> tuple:
        """Address record for plans/debug dumps."""
        return (self.seed, chunk, step, name)
