"""Kernel dispatch: the compiled extension when importable, numpy/Python otherwise.

Set ``DQC1TRACE_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("DQC1TRACE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py

clenshaw = _impl.clenshaw
fwht_rows = _impl.fwht_rows
walk_enumerate = _impl.walk_enumerate

__all__ = ["BACKEND", "clenshaw", "fwht_rows", "walk_enumerate"]
