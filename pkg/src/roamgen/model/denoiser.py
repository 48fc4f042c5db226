"""The denoising transformer.

One forward call predicts the clean current block from its noisy version,
attending over [reference KV || history KV || self] with band-fixed rotary
positions. Geometric warp channels are concatenated to the input
projection of the current block only; history/reference blocks enter the
cache through a dedicated self-attention-only encode pass with those
channels structurally zero and sigma 0, which makes every cache entry a
pure function of its block content.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import torch
import torch.nn as nn

from roamgen.model.blocks import BlockKind, LatentBlock
from roamgen.model.config import DenoiserConfig
from roamgen.model.rotary import apply_rotary, assign_positions


def attention_mask(segment_lengths: Sequence[int]) -> torch.Tensor:
    """Boolean (query x key) mask for a [reference, history..., current] layout.

    The current block is the only query segment and may attend to every
    listed key segment, bidirectionally within itself; cache entries are
    frozen keys and contribute no queries. The mask is therefore all-true
    with width sum(segment_lengths) and height = the last segment.
    """
    if len(segment_lengths) == 0:
        raise ValueError("layout needs at least the current segment")
    q = segment_lengths[-1]
    return torch.ones(q, int(sum(segment_lengths)), dtype=torch.bool)


@dataclass
class ChunkConditions:
    """Everything a forward call conditions on besides the noisy tokens."""

    cache_view: Optional[list] = None        # per layer: {"reference": (k,v)|None, "history": [(k,v,age)]}
    warp_tokens: Optional[torch.Tensor] = None   # (B, T, geo_dim) or (T, geo_dim)
    tag: Optional[torch.Tensor] = None           # (B,) long


class FourierSigmaEmbed(nn.Module):
    """Noise-level embedding from fixed Fourier features of sigma.

    Plain sigma (not log) keeps sigma=0 encode passes well-defined.
    """

    def __init__(self, width: int, n_freqs: int = 32):
        super().__init__()
        freqs = torch.from_numpy(np.geomspace(0.25, 40.0, n_freqs)).float()
        self.register_buffer("freqs", freqs)
        self.proj = nn.Sequential(nn.Linear(2 * n_freqs, width), nn.SiLU(),
                                  nn.Linear(width, width))

    def forward(self, sigma: torch.Tensor) -> torch.Tensor:
        angles = sigma[:, None] * self.freqs[None, :]
        feats = torch.cat([torch.sin(angles), torch.cos(angles)], dim=-1)
        return self.proj(feats)


class TransformerLayer(nn.Module):
    def __init__(self, config: DenoiserConfig):
        super().__init__()
        self.config = config
        self.norm1 = nn.LayerNorm(config.width)
        self.qkv = nn.Linear(config.width, 3 * config.width)
        self.out = nn.Linear(config.width, config.width)
        self.norm2 = nn.LayerNorm(config.width)
        hidden = int(config.width * config.mlp_ratio)
        self.mlp = nn.Sequential(nn.Linear(config.width, hidden), nn.GELU(),
                                 nn.Linear(hidden, config.width))

    def project_kv(self, h: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        """Pre-rotary key/value tensors (B, T, heads, head_dim) for caching."""
        b, t, _ = h.shape
        qkv = self.qkv(self.norm1(h))
        qkv = qkv.reshape(b, t, 3, self.config.heads, self.config.head_dim)
        return qkv[:, :, 1], qkv[:, :, 2]

    def forward(self, h: torch.Tensor, positions, layer_cache) -> torch.Tensor:
        cfg = self.config
        b, t, _ = h.shape
        qkv = self.qkv(self.norm1(h))
        qkv = qkv.reshape(b, t, 3, cfg.heads, cfg.head_dim)
        q, k, v = qkv[:, :, 0], qkv[:, :, 1], qkv[:, :, 2]

        q = apply_rotary(q, positions, cfg.rotary_base)
        keys = [apply_rotary(k, positions, cfg.rotary_base)]
        values = [v]
        if layer_cache is not None:
            bands = cfg.bands()
            ref = layer_cache.get("reference")
            if ref is not None:
                rk, rv = ref
                rpos = assign_positions(BlockKind.REFERENCE, bands)
                keys.insert(0, apply_rotary(rk.to(h.dtype), rpos, cfg.rotary_base))
                values.insert(0, rv.to(h.dtype))
            hist = layer_cache.get("history", ())
            for i, (hk, hv, age) in enumerate(hist):
                hpos = assign_positions(BlockKind.HISTORY, bands, age=age)
                keys.insert(-1, apply_rotary(hk.to(h.dtype), hpos, cfg.rotary_base))
                values.insert(-1, hv.to(h.dtype))

        kcat = torch.cat(keys, dim=1)
        vcat = torch.cat(values, dim=1)
        # [reference || history || self] layout; the mask over it is all-true
        # (see attention_mask), so plain softmax attention is exact.
        logits = torch.einsum("bqhd,bkhd->bhqk", q, kcat) / (cfg.head_dim ** 0.5)
        attn = torch.softmax(logits, dim=-1)
        mixed = torch.einsum("bhqk,bkhd->bqhd", attn, vcat)
        h = h + self.out(mixed.reshape(b, t, cfg.width))
        h = h + self.mlp(self.norm2(h))
        return h


class Denoiser(nn.Module):
    """x0-prediction denoiser over latent blocks."""

    def __init__(self, config: DenoiserConfig):
        super().__init__()
        self.config = config
        self.in_proj = nn.Linear(config.token_dim + config.geo_dim, config.width)
        self.sigma_embed = FourierSigmaEmbed(config.width)
        self.tag_embed = nn.Embedding(config.tag_vocab, config.width)
        self.layers = nn.ModuleList(TransformerLayer(config) for _ in range(config.layers))
        self.final_norm = nn.LayerNorm(config.width)
        self.out_proj = nn.Linear(config.width, config.token_dim)
        # Learned sigma-dependent input passthrough: lets the net express
        # x0 ~= x_t at small noise without spending capacity on identity.
        self.skip_gate = nn.Linear(2 * self.sigma_embed.freqs.numel(), 1)
        # Direct linear path from the current block's geometric channels to
        # the output: warped pixels are near-answers on covered patches and
        # must not be squeezed through the trunk width. Initialized at the
        # analytic copy map (latent = 2*pixel - mask), which training refines.
        self.geo_out = nn.Linear(config.geo_dim, config.token_dim)
        with torch.no_grad():
            pp = config.patch * config.patch
            c = config.image_channels
            w = torch.zeros(config.token_dim, config.geo_dim)
            for p in range(pp):
                for ch in range(c):
                    w[p * c + ch, p * (c + 1) + ch] = 2.0
                    w[p * c + ch, p * (c + 1) + c] = -1.0
            self.geo_out.weight.copy_(w)
            self.geo_out.bias.zero_()

    @property
    def device(self):
        return self.out_proj.weight.device

    @property
    def dtype(self):
        return self.out_proj.weight.dtype

    def _prepare(self, tokens, warp_tokens, tag, sigma):
        if isinstance(tokens, LatentBlock):
            if tokens.kind is not BlockKind.CURRENT:
                raise ValueError("forward denoises current blocks only")
            tokens = tokens.tokens
        if tokens.dim() == 2:
            tokens = tokens[None]
        b, t, d = tokens.shape
        cfg = self.config
        if t != cfg.tokens_per_block or d != cfg.token_dim:
            raise ValueError(f"expected tokens ({cfg.tokens_per_block}, {cfg.token_dim}), "
                             f"got ({t}, {d})")
        if warp_tokens is None:
            warp_tokens = tokens.new_zeros(b, t, cfg.geo_dim)
        else:
            if warp_tokens.dim() == 2:
                warp_tokens = warp_tokens[None]
            warp_tokens = warp_tokens.to(tokens.dtype)
            if warp_tokens.shape != (b, t, cfg.geo_dim):
                raise ValueError(f"warp tokens shape {tuple(warp_tokens.shape)} does not "
                                 f"match ({b}, {t}, {cfg.geo_dim})")
        if tag is None:
            tag = torch.zeros(b, dtype=torch.long, device=tokens.device)
        else:
            tag = torch.as_tensor(tag, dtype=torch.long, device=tokens.device).reshape(-1)
            if tag.shape[0] == 1 and b > 1:
                tag = tag.expand(b)
        sigma = torch.as_tensor(sigma, dtype=tokens.dtype, device=tokens.device).reshape(-1)
        if sigma.shape[0] == 1 and b > 1:
            sigma = sigma.expand(b)
        return tokens, warp_tokens, tag, sigma

    def _trunk(self, tokens, warp_tokens, tag, sigma, cache_view, collect_kv=False):
        cfg = self.config
        h = self.in_proj(torch.cat([tokens, warp_tokens], dim=-1))
        h = h + self.sigma_embed(sigma)[:, None, :]
        h = h + self.tag_embed(tag)[:, None, :]
        positions = assign_positions(BlockKind.CURRENT, cfg.bands())
        collected = []
        for i, layer in enumerate(self.layers):
            if collect_kv:
                collected.append(layer.project_kv(h))
            layer_cache = cache_view[i] if cache_view is not None else None
            h = layer(h, positions, layer_cache)
        return h, collected

    def forward(self, tokens, sigma, cond: ChunkConditions | None = None):
        """Predict the clean block from a noisy one at noise level sigma."""
        cond = cond or ChunkConditions()
        tokens, warp_tokens, tag, sigma = self._prepare(
            tokens, cond.warp_tokens, cond.tag, sigma)
        self._check_cache(cond.cache_view, tokens)
        h, _ = self._trunk(tokens, warp_tokens, tag, sigma, cond.cache_view)
        angles = sigma[:, None] * self.sigma_embed.freqs[None, :]
        gate = self.skip_gate(torch.cat([torch.sin(angles), torch.cos(angles)], dim=-1))
        return (self.out_proj(self.final_norm(h))
                + gate[:, :, None] * tokens
                + self.geo_out(warp_tokens))

    def encode_block_kv(self, tokens, tag=None) -> List[Tuple[torch.Tensor, torch.Tensor]]:
        """Per-layer pre-rotary (key, value) for caching a clean block.

        Self-attention only, sigma 0, geometric channels structurally zero:
        cache entries depend on nothing but the block's content (and tag).
        """
        if isinstance(tokens, LatentBlock):
            tokens = tokens.tokens
        tokens, warp_tokens, tag, sigma = self._prepare(tokens, None, tag, 0.0)
        assert torch.all(warp_tokens == 0), "cache encode must see zero geometric channels"
        _, collected = self._trunk(tokens, warp_tokens, tag, sigma,
                                   cache_view=None, collect_kv=True)
        return collected

    def _check_cache(self, cache_view, tokens):
        if cache_view is None:
            return
        cfg = self.config
        if len(cache_view) != cfg.layers:
            raise ValueError(f"cache has {len(cache_view)} layers, model has {cfg.layers}")
        for entry in cache_view:
            for kv in ([entry["reference"]] if entry.get("reference") is not None else []):
                k, _ = kv
                if k.shape[-2:] != (cfg.heads, cfg.head_dim) or k.shape[-3] != cfg.tokens_per_block:
                    raise ValueError("cached reference kv does not match this config")
            for (hk, _, _) in entry.get("history", ()):
                if hk.shape[-2:] != (cfg.heads, cfg.head_dim) or hk.shape[-3] != cfg.tokens_per_block:
                    raise ValueError("cached history kv does not match this config")
