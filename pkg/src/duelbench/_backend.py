"""Kernel backend selection.

The compiled extension is preferred. Setting ``DUELBENCH_PURE_PYTHON=1``
(or a failed import) selects the pure-Python twin.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def get_kernels(name: str | None = None) -> ModuleType:
    """Return the kernel module for ``name`` ("cython", "python" or None for default)."""
    if name is None:
        name = BACKEND
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not available; build the extension")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def compiled_available() -> bool:
    return _compiled is not None


if _compiled is not None and not os.environ.get("DUELBENCH_PURE_PYTHON"):
    BACKEND = "cython"
else:
    BACKEND = "python"

kernels = get_kernels(BACKEND)
