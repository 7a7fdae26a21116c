"""Selects the compiled solver loops when available, else the pure twin.

Set LMMK_PURE_PYTHON=1 before import to force the pure-NumPy loops.  Both
implementations are bit-identical by construction; the compiled one only
removes interpreter overhead from the pivot iterations.
"""

from __future__ import annotations

import os

from . import _pyref

OPTIMAL_CODE = _pyref.OPTIMAL_CODE
UNBOUNDED_CODE = _pyref.UNBOUNDED_CODE
ITERATION_CODE = _pyref.ITERATION_CODE
NUMERICAL_CODE = _pyref.NUMERICAL_CODE

if os.environ.get("LMMK_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pyref
    HAVE_COMPILED = False
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]

        HAVE_COMPILED = True
    except ImportError:
        _impl = _pyref
        HAVE_COMPILED = False

BACKEND_NAME = "compiled" if HAVE_COMPILED else "pure"

dense_loop = _impl.dense_loop
bounded_dual_loop = _impl.bounded_dual_loop
