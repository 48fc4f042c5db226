"""Browser-client checks, run only where the frontend has been built.

The primary suite never requires the UI; these wrap the frontend's own
node test runner and its live-server integration script when a built
bundle is present (frontend/dist after `npm install && npm run build`).
"""

from __future__ import annotations

import shutil
import subprocess
from pathlib import Path

import pytest

FRONTEND = Path(__file__).resolve().parent.parent / "frontend"

pytestmark = pytest.mark.skipif(
    shutil.which("node") is None or not (FRONTEND / "dist" / "test").exists(),
    reason="frontend not built (cd frontend && npm install && npm run build)")


def test_frontend_unit_suite():
    proc = subprocess.run(
        ["node", "--test", "dist/test/protocol.test.js", "dist/test/state.test.js",
         "dist/test/keymap.test.js", "dist/test/minimap_hud.test.js"],
        cwd=FRONTEND, capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0, proc.stdout + proc.stderr


def test_frontend_live_server_integration():
    proc = subprocess.run(
        ["node", "dist/test/integration.js"],
        cwd=FRONTEND, capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert "integration ok" in proc.stdout
