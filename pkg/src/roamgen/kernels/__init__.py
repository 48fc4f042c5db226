"""Hot raster kernels: z-buffer splatting and scene ray-casting.

Two interchangeable backends: a Cython extension (built by setup.py) and a
pure-NumPy fallback. Selection happens once at import, controlled by the
``ROAMGEN_KERNELS`` environment variable:

    auto    use the compiled core if importable, else fall back (default)
    cython  require the compiled core, raise if missing
    numpy   force the fallback

``ACTIVE_IMPL`` names the backend in use; ``load_impl`` returns a specific
backend module for benchmarks and cross-checks.
"""

from __future__ import annotations

import importlib
import os

_CHOICE = os.environ.get("ROAMGEN_KERNELS", "auto").lower()
if _CHOICE not in ("auto", "cython", "numpy"):
    raise ValueError(f"ROAMGEN_KERNELS must be auto|cython|numpy, got {_CHOICE!r}")


def load_impl(name):
    """Import a specific backend module: 'cython' or 'numpy'."""
    return importlib.import_module(f"roamgen.kernels._impl_{name}")


if _CHOICE == "numpy":
    _impl = load_impl("numpy")
elif _CHOICE == "cython":
    _impl = load_impl("cython")
else:
    try:
        _impl = load_impl("cython")
    except ImportError:
        _impl = load_impl("numpy")

ACTIVE_IMPL = _impl.IMPL

forward_warp = _impl.forward_warp
splat_points = _impl.splat_points
render_scene = _impl.render_scene

__all__ = ["ACTIVE_IMPL", "forward_warp", "splat_points", "render_scene", "load_impl"]
