"""Checkpoint container: manifest.json + weights.bin.

weights.bin is the concatenation of all tensors as little-endian float32
in manifest order; the manifest records the config, tensor names/shapes/
dtypes, the training stage, and the RNG state needed to resume streams.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import numpy as np
import torch

from roamgen.model.config import DenoiserConfig, NoiseSchedule
from roamgen.model.denoiser import Denoiser


def save_checkpoint(model: Denoiser, path: str | Path, *, stage: str = "untrained",
                    schedule: Optional[NoiseSchedule] = None,
                    rng_state: Optional[dict] = None, extra: Optional[dict] = None) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    state = model.state_dict()
    tensors = []
    blobs = []
    for name, tensor in state.items():
        arr = tensor.detach().cpu().numpy().astype("<f4")
        tensors.append({"name": name, "shape": list(arr.shape), "dtype": "f4"})
        blobs.append(arr.tobytes())
    manifest = {
        "config": model.config.to_dict(),
        "tensors": tensors,
        "stage": stage,
        "rng_state": rng_state or {},
    }
    if schedule is not None:
        manifest["schedule"] = list(schedule.sigmas)
    if extra:
        manifest["extra"] = extra
    (path / "manifest.json").write_text(json.dumps(manifest, indent=1))
    (path / "weights.bin").write_bytes(b"".join(blobs))
    return path


def load_checkpoint(path: str | Path):
    """Returns (model, manifest). The model comes back in float32."""
    path = Path(path)
    manifest = json.loads((path / "manifest.json").read_text())
    config = DenoiserConfig.from_dict(manifest["config"])
    model = Denoiser(config)
    raw = (path / "weights.bin").read_bytes()
    state = {}
    offset = 0
    for spec in manifest["tensors"]:
        count = int(np.prod(spec["shape"])) if spec["shape"] else 1
        arr = np.frombuffer(raw, dtype="<f4", count=count, offset=offset)
        offset += count * 4
        state[spec["name"]] = torch.from_numpy(arr.copy()).reshape(spec["shape"])
    if offset != len(raw):
        raise ValueError(f"weights.bin has {len(raw)} bytes, manifest describes {offset}")
    model.load_state_dict(state)
    return model, manifest
