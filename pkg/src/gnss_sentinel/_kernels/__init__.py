"""Hot conv kernels with a compiled core and a pure-numpy fallback.

The compiled Cython extension is picked at import time when available;
``GNSS_SENTINEL_PURE_PY=1`` forces the fallback. Both backends are
bit-identical, so the choice only affects speed.
"""

from __future__ import annotations

import os

import numpy as np

from . import pure

if os.environ.get("GNSS_SENTINEL_PURE_PY"):
    _impl = pure
    BACKEND = "pure"
else:
    try:
        from . import _fast as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = pure
        BACKEND = "pure"


def im2col(x: np.ndarray, kh: int, kw: int, stride: int = 1, pad: int = 0) -> np.ndarray:
    """(N,C,H,W) -> (N*out_h*out_w, C*kh*kw) patch-row matrix."""
    x = np.ascontiguousarray(x)
    return _impl.im2col(x, kh, kw, stride, pad)


def col2im(
    cols: np.ndarray, shape: tuple[int, int, int, int], kh: int, kw: int, stride: int = 1, pad: int = 0
) -> np.ndarray:
    """Scatter-add patch matrix back to (N,C,H,W); adjoint of :func:`im2col`."""
    cols = np.ascontiguousarray(cols)
    n, c, h, w = shape
    return _impl.col2im(cols, n, c, h, w, kh, kw, stride, pad)
