"""Backend selection for the hot loops.

The compiled extension is used when it was built; set
``FRACLADDER_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
scatter_pairs = _kernels_py.scatter_pairs
offset_sum = _kernels_py.offset_sum

if os.environ.get("FRACLADDER_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = "cython"
        scatter_pairs = _ckernels.scatter_pairs
        offset_sum = _ckernels.offset_sum


def get_backend(name):
    """Return a namespace-like module for an explicit backend name."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
