"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; the
pure-NumPy twin is the fallback and produces bit-identical results.
Set ``SPOTKIT_PURE=1`` to force the fallback (used by the parity tests
and the benchmark).
"""

import os

from . import _kernels_py

if os.environ.get("SPOTKIT_PURE") == "1":
    _impl = _kernels_py
    USING_COMPILED = False
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        USING_COMPILED = True
    except ImportError:
        _impl = _kernels_py
        USING_COMPILED = False

BACKEND_NAME = "compiled" if USING_COMPILED else "pure-python"

soft_nms_kernel = _impl.soft_nms_kernel
hard_nms_kernel = _impl.hard_nms_kernel
match_kernel = _impl.match_kernel
