"""Hot-loop kernel selection.

Prefers the compiled extension; falls back to the numpy implementation when
the extension is missing or ``BALLBINS_PURE_PYTHON`` is set (nonempty).
Both backends consume identical uniform streams and produce identical
results, so the choice never affects outputs, only speed.
"""

import os

if os.environ.get("BALLBINS_PURE_PYTHON"):
    from . import py as _impl
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import py as _impl

BACKEND = _impl.BACKEND
max_loads = _impl.max_loads
waiting_scan = _impl.waiting_scan

__all__ = ["BACKEND", "max_loads", "waiting_scan"]
