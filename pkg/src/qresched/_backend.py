"""Kernel backend selection.

The compiled extension is used when importable.  Setting the environment
variable ``QRESCHED_PURE_PYTHON=1`` forces the pure-Python kernels.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _kernels_py


def _select() -> ModuleType:
    if os.environ.get("QRESCHED_PURE_PYTHON", "") not in ("", "0"):
        return _kernels_py
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return _kernels_py
    return _kernels


kernels: ModuleType = _select()
python_kernels: ModuleType = _kernels_py


def use(name: str) -> None:
    """Switch backend at runtime ("cython" or "python"); used by benchmarks."""
    global kernels
    if name == "python":
        kernels = _kernels_py
    elif name == "cython":
        from . import _kernels  # type: ignore[attr-defined]

        kernels = _kernels
    else:
        raise ValueError(f"unknown backend {name!r}")
