"""Runtime tuning: glibc allocator thresholds and BLAS thread pinning.

Training allocates and frees many multi-megabyte activation buffers per
step; glibc hands such blocks back to the kernel by default, so every step
pays page-fault costs to get them again. Raising the mmap/trim thresholds
keeps the blocks on the heap for reuse.

BLAS is pinned to one thread: the convolution GEMMs here are small enough
that thread synchronization costs more than it saves, and a fixed thread
count keeps reductions bit-identical across machines and environment
settings. Neither tweak changes any computed value on its own; both are
no-ops where unsupported.
"""

from __future__ import annotations

import ctypes

_M_TRIM_THRESHOLD = -1
_M_MMAP_THRESHOLD = -3

_done = False
_blas_limiter = None


def tune_allocator() -> bool:
    global _done
    pin_blas_single_thread()
    if _done:
        return True
    try:
        libc = ctypes.CDLL("libc.so.6")
        # glibc caps M_MMAP_THRESHOLD at 32 MiB.
        ok = libc.mallopt(_M_MMAP_THRESHOLD, (32 << 20) - 4096)
        ok &= libc.mallopt(_M_TRIM_THRESHOLD, 1 << 30)
        _done = bool(ok)
    except (OSError, AttributeError):
        _done = False
    return _done


def pin_blas_single_thread() -> bool:
    global _blas_limiter
    if _blas_limiter is not None:
        return True
    try:
        from threadpoolctl import threadpool_limits

        _blas_limiter = threadpool_limits(limits=1, user_api="blas")
        return True
    except ImportError:
        return False
