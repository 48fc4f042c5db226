"""Newline-delimited JSON training metrics."""

from __future__ import annotations

import json
import time
from pathlib import Path
from typing import Optional


class MetricsWriter:
    def __init__(self, path: Optional[str | Path] = None):
        self._fh = None
        if path is not None:
            p = Path(path)
            p.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(p, "a", encoding="utf-8")
        self._t0 = time.perf_counter()

    def write(self, **record) -> None:
        if self._fh is None:
            return
        record.setdefault("wall_seconds", round(time.perf_counter() - self._t0, 3))
        self._fh.write(json.dumps(record) + "\n")
        self._fh.flush()

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None
