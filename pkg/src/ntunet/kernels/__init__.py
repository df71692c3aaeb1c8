"""Criterion kernels with a compiled backend and a numpy fallback.

The compiled extension is used when importable; set ``NTUNET_PURE_PYTHON=1``
to force the numpy implementation.
"""

import os

from . import _pykernels as python_backend

compiled_backend = None
if os.environ.get("NTUNET_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_active = compiled_backend if compiled_backend is not None else python_backend

BACKEND = _active.BACKEND
criterion_totals = _active.criterion_totals
sweep_totals_s2 = _active.sweep_totals_s2


def get_backend(name=None):
    """Return the kernel module for ``name`` ("cython" or "python")."""
    if name is None:
        return _active
    if name == "python":
        return python_backend
    if name == "cython":
        if compiled_backend is None:
            raise ImportError("compiled kernels are not available")
        return compiled_backend
    raise ValueError(f"unknown backend {name!r}")
