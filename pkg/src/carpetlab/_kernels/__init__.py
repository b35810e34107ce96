"""Kernel selection: compiled extension if available, numpy fallback otherwise.

Set CARPETLAB_PURE=1 to force the pure-Python kernels even when the
compiled extension is installed (used by the equivalence tests and the
benchmark).  The active implementation is reported in IMPLEMENTATION.
"""

from __future__ import annotations

import os

from . import fallback

if os.environ.get("CARPETLAB_PURE") == "1":
    _impl = fallback
    IMPLEMENTATION = "fallback"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        IMPLEMENTATION = "compiled"
    except ImportError:
        _impl = fallback
        IMPLEMENTATION = "fallback"

mcmullen_escape = _impl.mcmullen_escape
quadratic_escape = _impl.quadratic_escape
siegel_escape = _impl.siegel_escape
mcmullen_classify = _impl.mcmullen_classify

__all__ = [
    "IMPLEMENTATION",
    "fallback",
    "mcmullen_escape",
    "quadratic_escape",
    "siegel_escape",
    "mcmullen_classify",
]
