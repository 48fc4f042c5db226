"""Episode corpora for training.

A corpus directory holds one subdirectory per scene, each with paired
trajectories of the same scene: `ref/` (the reference video the model
roams from) and `tgt/` (a second trajectory supplying ground-truth targets
for rerendering). The synthetic-looking twin of a corpus is the same data
with Gaussian-blurred frames, which manufactures the sharp-vs-blur domain
gap the dual-teacher objective is tested on.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path
from typing import List, Tuple

import numpy as np

from roamgen.microworld.episode import Episode, load_episode


def _gauss_kernel(sigma: float, radius: int) -> np.ndarray:
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return (k / k.sum()).astype(np.float32)


def gaussian_blur(frames: np.ndarray, sigma: float = 1.0, radius: int = 2) -> np.ndarray:
    """Separable blur over the two spatial axes of (..., H, W, C) frames."""
    if sigma <= 0:
        return frames.copy()
    kernel = _gauss_kernel(sigma, radius)
    out = frames.astype(np.float32)
    for axis in (-3, -2):
        pad = [(0, 0)] * out.ndim
        pad[axis] = (radius, radius)
        padded = np.pad(out, pad, mode="edge")
        acc = np.zeros_like(out)
        for i, w in enumerate(kernel):
            sl = [slice(None)] * out.ndim
            sl[axis] = slice(i, i + out.shape[axis])
            acc += w * padded[tuple(sl)]
        out = acc
    return out


def blur_episode(ep: Episode, sigma: float) -> Episode:
    return replace(ep, frames=gaussian_blur(ep.frames, sigma))


class PairedEpisodeDataset:
    def __init__(self, root: str | Path, blur_sigma: float = 0.0):
        self.root = Path(root)
        self.blur_sigma = blur_sigma
        scene_dirs = sorted(p for p in self.root.iterdir()
                            if (p / "ref" / "meta.json").exists())
        if not scene_dirs:
            raise FileNotFoundError(f"no scene_*/ref episodes under {self.root}")
        self.pairs: List[Tuple[Episode, Episode]] = []
        for d in scene_dirs:
            ref = load_episode(d / "ref")
            tgt = load_episode(d / "tgt") if (d / "tgt" / "meta.json").exists() else ref
            if blur_sigma > 0:
                ref = blur_episode(ref, blur_sigma)
                tgt = blur_episode(tgt, blur_sigma)
            self.pairs.append((ref, tgt))

    def __len__(self) -> int:
        return len(self.pairs)

    def pair(self, index: int) -> Tuple[Episode, Episode]:
        return self.pairs[index % len(self.pairs)]

    @property
    def chunk_len(self) -> int:
        return self.pairs[0][0].chunk_len

    @property
    def num_chunks(self) -> int:
        return self.pairs[0][1].num_chunks
