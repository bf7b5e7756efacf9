"""Kernel backend selection.

Prefers the compiled extension, falls back to the NumPy implementation
when the extension was not built.  Set ARMSHAPER_PURE_PY=1 to force the
fallback (useful for debugging and for benchmarking the two against
each other).
"""

import os

_force_pure = os.environ.get("ARMSHAPER_PURE_PY", "") not in ("", "0")

if _force_pure:
    from . import _kernels_py as _impl

    BACKEND = "pure"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "pure"

modal_response = _impl.modal_response
shape_channel = _impl.shape_channel
