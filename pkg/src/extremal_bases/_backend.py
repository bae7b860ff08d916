"""Kernel backend selection.

The compiled extension is used when it is importable; otherwise the
pure-Python twin is used.  Setting ``EXTREMAL_BASES_PURE_PYTHON=1`` forces
the fallback.
"""
import os

from . import _kernels_py

if os.environ.get("EXTREMAL_BASES_PURE_PYTHON"):
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "compiled"
    except ImportError:  # extension not built
        kernels = _kernels_py
        BACKEND = "python"


def get_kernels(name=None):
    """Return the kernel module called ``name`` ("compiled" or "python")."""
    if name is None:
        return kernels
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
