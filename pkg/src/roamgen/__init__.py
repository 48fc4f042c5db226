"""roamgen: streaming interactive world generation on a procedural micro-world.

Chunked autoregressive denoising with a constant-memory spatiotemporal KV
cache, explicit depth-warp conditioning, and dual-teacher distribution
matching distillation, served over a websocket for live roaming.
"""

__version__ = "0.1.0"
