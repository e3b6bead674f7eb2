"""Pure-numpy fallback for the convolution patch kernels.

Matches the compiled backend bit for bit: ``col2im`` accumulates in
(ky, kx)-major order in both implementations, so swapping backends never
changes a trained model.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import as_strided


def im2col(x: np.ndarray, kh: int, kw: int, stride: int, pad: int) -> np.ndarray:
    """(N,C,H,W) -> (N*out_h*out_w, C*kh*kw) patch rows."""
    n, c, h, w = x.shape
    out_h = (h + 2 * pad - kh) // stride + 1
    out_w = (w + 2 * pad - kw) // stride + 1
    if pad > 0:
        x = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    sn, sc, sh, sw = x.strides
    patches = as_strided(
        x,
        shape=(n, c, kh, kw, out_h, out_w),
        strides=(sn, sc, sh, sw, sh * stride, sw * stride),
    )
    return patches.transpose(0, 4, 5, 1, 2, 3).reshape(n * out_h * out_w, c * kh * kw)


def col2im(
    cols: np.ndarray, n: int, c: int, h: int, w: int, kh: int, kw: int, stride: int, pad: int
) -> np.ndarray:
    """Adjoint of :func:`im2col`: scatter-add patch rows back to (N,C,H,W)."""
    out_h = (h + 2 * pad - kh) // stride + 1
    out_w = (w + 2 * pad - kw) // stride + 1
    x_pad = np.zeros((n, c, h + 2 * pad, w + 2 * pad), dtype=cols.dtype)
    cols6 = cols.reshape(n, out_h, out_w, c, kh, kw)
    # Descending (ky, kx) adds contributions to each element in ascending
    # (out_y, out_x) order, matching the compiled backend bit for bit.
    for ky in reversed(range(kh)):
        for kx in reversed(range(kw)):
            x_pad[:, :, ky : ky + stride * out_h : stride, kx : kx + stride * out_w : stride] += (
                cols6[:, :, :, :, ky, kx].transpose(0, 3, 1, 2)
            )
    if pad > 0:
        return np.ascontiguousarray(x_pad[:, :, pad : pad + h, pad : pad + w])
    return x_pad
