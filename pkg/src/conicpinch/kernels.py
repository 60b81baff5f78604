"""Kernel dispatch: compiled extension when importable, numpy fallback otherwise.

Set ``CONICPINCH_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("CONICPINCH_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "compiled"


def laplacian5(h, spacing):
    return _impl.laplacian5(np.ascontiguousarray(h, dtype=np.float64), float(spacing))


def level_set_cells(f, level):
    return _impl.level_set_cells(np.ascontiguousarray(f, dtype=np.float64), float(level))
