# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled conv patch kernels for float32 and float64.

Layout: a patch matrix holds one row of C*kh*kw values per output position,
rows ordered (sample, out_y, out_x). Both kernels walk the patch matrix
row-major so every cache line is used fully; a tile of a few samples keeps
the whole patch matrix cache-resident.

col2im accumulates in ascending (out_y, out_x) order per input element,
equivalently descending (ky, kx), which the numpy fallback reproduces
exactly so both backends give bit-identical gradients.
"""

import numpy as np

cimport cython
cimport numpy as cnp

cnp.import_array()

ctypedef fused real:
    float
    double


cdef inline void _im2col_one(
    const real* x, real* cols, Py_ssize_t c, Py_ssize_t h, Py_ssize_t w,
    int kh, int kw, int stride, int pad, Py_ssize_t out_h, Py_ssize_t out_w
) noexcept nogil:
    cdef Py_ssize_t j, ky, kx, oy, ox, iy, ix, ix0, iy0
    cdef real* crow
    cdef const real* xrow
    cdef bint interior
    for oy in range(out_h):
        iy0 = oy * stride - pad
        for ox in range(out_w):
            crow = cols + (oy * out_w + ox) * (c * kh * kw)
            ix0 = ox * stride - pad
            interior = iy0 >= 0 and iy0 + kh <= h and ix0 >= 0 and ix0 + kw <= w
            if interior:
                for j in range(c):
                    for ky in range(kh):
                        xrow = x + (j * h + iy0 + ky) * w + ix0
                        for kx in range(kw):
                            crow[kx] = xrow[kx]
                        crow += kw
            else:
                for j in range(c):
                    for ky in range(kh):
                        iy = iy0 + ky
                        if iy < 0 or iy >= h:
                            for kx in range(kw):
                                crow[kx] = 0.0
                            crow += kw
                            continue
                        for kx in range(kw):
                            ix = ix0 + kx
                            if ix < 0 or ix >= w:
                                crow[kx] = 0.0
                            else:
                                crow[kx] = x[(j * h + iy) * w + ix]
                        crow += kw
    return


cdef inline void _col2im_one(
    const real* cols, real* x, Py_ssize_t c, Py_ssize_t h, Py_ssize_t w,
    int kh, int kw, int stride, int pad, Py_ssize_t out_h, Py_ssize_t out_w
) noexcept nogil:
    cdef Py_ssize_t j, ky, kx, oy, ox, iy, ix, ix0, iy0
    cdef const real* crow
    cdef real* xrow
    cdef bint interior
    for oy in range(out_h):
        iy0 = oy * stride - pad
        for ox in range(out_w):
            crow = cols + (oy * out_w + ox) * (c * kh * kw)
            ix0 = ox * stride - pad
            interior = iy0 >= 0 and iy0 + kh <= h and ix0 >= 0 and ix0 + kw <= w
            if interior:
                for j in range(c):
                    for ky in range(kh):
                        xrow = x + (j * h + iy0 + ky) * w + ix0
                        for kx in range(kw):
                            xrow[kx] += crow[kx]
                        crow += kw
            else:
                for j in range(c):
                    for ky in range(kh):
                        iy = iy0 + ky
                        if iy < 0 or iy >= h:
                            crow += kw
                            continue
                        for kx in range(kw):
                            ix = ix0 + kx
                            if 0 <= ix < w:
                                x[(j * h + iy) * w + ix] += crow[kx]
                        crow += kw
    return


def im2col(real[:, :, :, ::1] x, int kh, int kw, int stride, int pad):
    """(N,C,H,W) -> (N*out_h*out_w, C*kh*kw) patch rows."""
    cdef Py_ssize_t n = x.shape[0], c = x.shape[1], h = x.shape[2], w = x.shape[3]
    cdef Py_ssize_t out_h = (h + 2 * pad - kh) // stride + 1
    cdef Py_ssize_t out_w = (w + 2 * pad - kw) // stride + 1
    cdef Py_ssize_t ckk = c * kh * kw
    if real is float:
        dtype = np.float32
    else:
        dtype = np.float64
    cols_arr = np.empty((n * out_h * out_w, ckk), dtype=dtype)
    cdef real[:, ::1] cols = cols_arr
    cdef Py_ssize_t i
    cdef const real* xp = &x[0, 0, 0, 0]
    cdef real* cp = &cols[0, 0]
    cdef Py_ssize_t x_stride = c * h * w
    cdef Py_ssize_t col_stride = out_h * out_w * ckk
    for i in range(n):
        _im2col_one(xp + i * x_stride, cp + i * col_stride, c, h, w, kh, kw, stride, pad, out_h, out_w)
    return cols_arr


def col2im(real[:, ::1] cols, int n, int c, int h, int w, int kh, int kw, int stride, int pad):
    """Adjoint of :func:`im2col`: scatter-add patch rows back to (N,C,H,W)."""
    cdef Py_ssize_t out_h = (h + 2 * pad - kh) // stride + 1
    cdef Py_ssize_t out_w = (w + 2 * pad - kw) // stride + 1
    cdef Py_ssize_t ckk = c * kh * kw
    if real is float:
        dtype = np.float32
    else:
        dtype = np.float64
    x_arr = np.zeros((n, c, h, w), dtype=dtype)
    cdef real[:, :, :, ::1] x = x_arr
    cdef Py_ssize_t i
    cdef const real* cp = &cols[0, 0]
    cdef real* xp = &x[0, 0, 0, 0]
    cdef Py_ssize_t x_stride = c * h * w
    cdef Py_ssize_t col_stride = out_h * out_w * ckk
    for i in range(n):
        _col2im_one(cp + i * col_stride, xp + i * x_stride, c, h, w, kh, kw, stride, pad, out_h, out_w)
    return x_arr
