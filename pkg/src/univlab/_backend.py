"""Backend selection: compiled Cython kernels when available, numpy twins
otherwise. ``UNIVLAB_PURE_PYTHON=1`` forces the fallback."""

import os

if os.environ.get("UNIVLAB_PURE_PYTHON"):
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as kernels

BACKEND = kernels.BACKEND_NAME
