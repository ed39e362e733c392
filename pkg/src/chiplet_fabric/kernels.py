"""Kernel dispatch: the compiled BFS extension when built, else pure Python.

Set ``CHIPLET_FABRIC_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _bfs_py

BACKEND = "python"

if os.environ.get("CHIPLET_FABRIC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _bfs as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _bfs_py
else:
    _impl = _bfs_py

bfs_distances = _impl.bfs_distances
eccentricities = _impl.eccentricities

__all__ = ["BACKEND", "bfs_distances", "eccentricities"]
