#!/usr/bin/env python3
"""Benchmark the compiled conv kernels against the pure-numpy fallback.

Times im2col/col2im on the shapes the default network actually runs, plus a
full training step through each backend, and verifies both backends agree
bit for bit. Force the fallback for a whole process with
GNSS_SENTINEL_PURE_PY=1.
"""

import time

import numpy as np

from gnss_sentinel import _kernels
from gnss_sentinel._kernels import pure
from gnss_sentinel._memtune import tune_allocator

SHAPES = [
    ("stem 1ch 64x64", (32, 1, 64, 64), 3, 1, 1),
    ("stage1 16ch 64x64", (32, 16, 64, 64), 3, 1, 1),
    ("stage2 entry 16ch s2", (32, 16, 64, 64), 3, 2, 1),
    ("stage2 32ch 32x32", (32, 32, 32, 32), 3, 1, 1),
    ("stage3 64ch 16x16", (32, 64, 16, 16), 3, 1, 1),
]


def timeit(fn, repeats=5):
    fn()
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats * 1000


def bench_kernels():
    rng = np.random.default_rng(0)
    print(f"active backend: {_kernels.BACKEND}")
    print(f"{'shape':24s} {'im2col C':>10s} {'im2col py':>10s} {'col2im C':>10s} {'col2im py':>10s}")
    for name, shape, k, stride, pad in SHAPES:
        x = rng.standard_normal(shape).astype(np.float32)
        n, c, h, w = shape
        cols = _kernels.im2col(x, k, k, stride, pad)
        assert np.array_equal(cols, pure.im2col(x, k, k, stride, pad)), name
        grad = rng.standard_normal(cols.shape).astype(np.float32)
        back_c = _kernels.col2im(grad, shape, k, k, stride, pad)
        back_py = pure.col2im(grad, n, c, h, w, k, k, stride, pad)
        assert np.array_equal(back_c, back_py), name
        t_ic = timeit(lambda: _kernels._impl.im2col(x, k, k, stride, pad))
        t_ip = timeit(lambda: pure.im2col(x, k, k, stride, pad))
        t_cc = timeit(lambda: _kernels._impl.col2im(grad, n, c, h, w, k, k, stride, pad))
        t_cp = timeit(lambda: pure.col2im(grad, n, c, h, w, k, k, stride, pad))
        print(f"{name:24s} {t_ic:9.2f}ms {t_ip:9.2f}ms {t_cc:9.2f}ms {t_cp:9.2f}ms")


def bench_training_step():
    from gnss_sentinel.cnn import CnnArch, Network

    rng = np.random.default_rng(1)
    x = rng.normal(0, 1, (32, 1, 64, 64)).astype(np.float32)
    y = rng.integers(0, 6, 32).astype(np.int64)
    results = {}
    for backend_name, impl in (("compiled", None), ("pure", pure)):
        if backend_name == "compiled" and _kernels.BACKEND != "compiled":
            print("compiled backend unavailable; skipping")
            continue
        saved = _kernels._impl
        if impl is not None:
            _kernels._impl = impl
        try:
            net = Network(CnnArch(), seed=2)
            net.loss_and_grad(x, y)
            results[backend_name] = timeit(lambda: net.loss_and_grad(x, y), repeats=3)
        finally:
            _kernels._impl = saved
    for name, ms in results.items():
        print(f"training step (batch 32), {name:8s}: {ms:7.1f} ms")
    if len(results) == 2:
        print(f"speedup: {results['pure'] / results['compiled']:.2f}x")


if __name__ == "__main__":
    tune_allocator()
    bench_kernels()
    print()
    bench_training_step()
