"""Neural network layers with hand-derived backward passes.

Convolutions run as im2col + GEMM through the kernel backend (compiled or
pure numpy, bit-identical either way). Layers cache what their backward
pass needs during a training-mode forward. Parameters are exposed as
(tag, array) pairs; the "weight" tag marks arrays subject to weight decay.

Everything is dtype-generic: training uses float32, gradient checks pass
float64 through the same code paths.
"""

from __future__ import annotations

import numpy as np

from .. import _kernels


class Layer:
    def params(self) -> list[tuple[str, np.ndarray]]:
        return []

    def grads(self) -> list[np.ndarray]:
        return []

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dout: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Conv2d(Layer):
    def __init__(
        self,
        c_in: int,
        c_out: int,
        kernel: int,
        stride: int,
        pad: int,
        rng: np.random.Generator,
        dtype=np.float32,
        bias: bool = True,
    ):
        fan_in = c_in * kernel * kernel
        scale = np.sqrt(2.0 / fan_in)
        self.W = (rng.standard_normal((c_out, fan_in)) * scale).astype(dtype)
        self.has_bias = bias
        self.b = np.zeros(c_out, dtype=dtype)
        self.dW = np.zeros_like(self.W)
        self.db = np.zeros_like(self.b)
        self.c_in, self.c_out, self.kernel, self.stride, self.pad = c_in, c_out, kernel, stride, pad
        self._cache = None

    def params(self):
        if self.has_bias:
            return [("weight", self.W), ("bias", self.b)]
        return [("weight", self.W)]

    def grads(self):
        if self.has_bias:
            return [self.dW, self.db]
        return [self.dW]

    def out_hw(self, h: int, w: int) -> tuple[int, int]:
        k, s, p = self.kernel, self.stride, self.pad
        return (h + 2 * p - k) // s + 1, (w + 2 * p - k) // s + 1

    # Patch tiles sized to stay cache-resident; the full patch matrix of a
    # large activation would be 9x its size and thrash memory bandwidth.
    _TILE_BYTES = 4 << 20

    def _tile_samples(self, l_out: int) -> int:
        per_sample = l_out * self.c_in * self.kernel * self.kernel * np.dtype(self.W.dtype).itemsize
        return max(1, self._TILE_BYTES // max(per_sample, 1))

    def forward(self, x, training):
        n, _, h, w = x.shape
        oh, ow = self.out_hw(h, w)
        l_out = oh * ow
        k, s, p = self.kernel, self.stride, self.pad
        ckk = self.c_in * k * k
        out = np.empty((n, self.c_out, l_out), dtype=self.W.dtype)
        ts = self._tile_samples(l_out)
        for i in range(0, n, ts):
            tile = x[i : i + ts]
            cols = _kernels.im2col(tile, k, k, s, p).reshape(len(tile), l_out, ckk)
            # (Cout, ckk) @ (t, ckk, L) batched into the NCHW layout directly.
            np.matmul(self.W, cols.transpose(0, 2, 1), out=out[i : i + ts])
        if self.has_bias:
            out += self.b[:, None]
        if training:
            self._cache = x
        return out.reshape(n, self.c_out, oh, ow)

    def backward(self, dout):
        x = self._cache
        n, _, h, w = x.shape
        oh, ow = dout.shape[2], dout.shape[3]
        l_out = oh * ow
        k, s, p = self.kernel, self.stride, self.pad
        ckk = self.c_in * k * k
        self.dW[...] = 0.0
        if self.has_bias:
            self.db[...] = dout.sum(axis=(0, 2, 3))
        dx = np.empty_like(x)
        ts = self._tile_samples(l_out)
        d3 = dout.reshape(n, self.c_out, l_out)
        for i in range(0, n, ts):
            tile = x[i : i + ts]
            cols = _kernels.im2col(tile, k, k, s, p).reshape(len(tile), l_out, ckk)
            d2 = d3[i : i + ts]
            self.dW += np.matmul(d2, cols).sum(axis=0)
            dcols = np.matmul(d2.transpose(0, 2, 1), self.W).reshape(-1, ckk)
            dx[i : i + ts] = _kernels.col2im(dcols, (len(tile), x.shape[1], h, w), k, k, s, p)
        self._cache = None
        return dx


class BatchNorm2d(Layer):
    """Per-channel batch statistics in training, running averages at inference."""

    def __init__(self, channels: int, eps: float = 1e-5, momentum: float = 0.1, dtype=np.float32):
        self.gamma = np.ones(channels, dtype=dtype)
        self.beta = np.zeros(channels, dtype=dtype)
        self.dgamma = np.zeros_like(self.gamma)
        self.dbeta = np.zeros_like(self.beta)
        self.running_mean = np.zeros(channels, dtype=dtype)
        self.running_var = np.ones(channels, dtype=dtype)
        self.eps = eps
        self.momentum = momentum
        self._cache = None

    def params(self):
        return [("norm", self.gamma), ("norm", self.beta)]

    def grads(self):
        return [self.dgamma, self.dbeta]

    def forward(self, x, training):
        c = x.shape[1]
        shape = (1, c, 1, 1)
        if training:
            n = x.shape[0] * x.shape[2] * x.shape[3]
            mean = x.mean(axis=(0, 2, 3))
            xhat = x - mean.reshape(shape)
            var = np.einsum("nchw,nchw->c", xhat, xhat) / n  # biased
            inv_std = 1.0 / np.sqrt(var + self.eps)
            xhat *= inv_std.reshape(shape)
            m = self.momentum
            self.running_mean[...] = (1 - m) * self.running_mean + m * mean
            self.running_var[...] = (1 - m) * self.running_var + m * var
            self._cache = (xhat, inv_std)
        else:
            inv_std = 1.0 / np.sqrt(self.running_var + self.eps)
            xhat = (x - self.running_mean.reshape(shape)) * inv_std.reshape(shape)
        out = xhat * self.gamma.reshape(shape)
        out += self.beta.reshape(shape)
        return out

    def backward(self, dout):
        xhat, inv_std = self._cache
        c = dout.shape[1]
        shape = (1, c, 1, 1)
        n = dout.shape[0] * dout.shape[2] * dout.shape[3]
        self.dgamma[...] = np.einsum("nchw,nchw->c", dout, xhat)
        self.dbeta[...] = np.sum(dout, axis=(0, 2, 3))
        # dx = gamma*inv_std * (dout - dbeta/n - xhat*dgamma/n); xhat is
        # clobbered in place, it is not needed afterwards.
        xhat *= (self.dgamma / n).reshape(shape)
        dx = dout - (self.dbeta / n).reshape(shape)
        dx -= xhat
        dx *= (self.gamma * inv_std).reshape(shape)
        self._cache = None
        return dx


class ReLU(Layer):
    def forward(self, x, training):
        out = np.maximum(x, 0)
        if training:
            self._mask = x > 0
        return out

    def backward(self, dout):
        return dout * self._mask


class GlobalAvgPool(Layer):
    """(N, C, H, W) -> (N, C)."""

    def forward(self, x, training):
        if training:
            self._shape = x.shape
        return x.mean(axis=(2, 3))

    def backward(self, dout):
        n, c, h, w = self._shape
        return np.broadcast_to(dout[:, :, None, None], (n, c, h, w)).astype(dout.dtype) / (h * w)


class Linear(Layer):
    def __init__(self, d_in: int, d_out: int, rng: np.random.Generator, dtype=np.float32, zero_init: bool = False):
        if zero_init:
            self.W = np.zeros((d_in, d_out), dtype=dtype)
        else:
            self.W = (rng.standard_normal((d_in, d_out)) * np.sqrt(2.0 / d_in)).astype(dtype)
        self.b = np.zeros(d_out, dtype=dtype)
        self.dW = np.zeros_like(self.W)
        self.db = np.zeros_like(self.b)

    def params(self):
        return [("weight", self.W), ("bias", self.b)]

    def grads(self):
        return [self.dW, self.db]

    def forward(self, x, training):
        if training:
            self._x = x
        return x @ self.W + self.b

    def backward(self, dout):
        self.dW[...] = self._x.T @ dout
        self.db[...] = dout.sum(axis=0)
        return dout @ self.W.T


class ResidualBlock(Layer):
    """conv-norm-relu-conv-norm plus skip, then relu.

    A stride-2 block halves the spatial dims and projects the skip with a
    1x1 convolution followed by its own normalization.
    """

    def __init__(self, c_in: int, c_out: int, stride: int, rng: np.random.Generator, dtype=np.float32):
        # Convs feeding a norm layer skip the bias; the norm cancels it anyway.
        self.conv1 = Conv2d(c_in, c_out, 3, stride, 1, rng, dtype, bias=False)
        self.bn1 = BatchNorm2d(c_out, dtype=dtype)
        self.relu1 = ReLU()
        self.conv2 = Conv2d(c_out, c_out, 3, 1, 1, rng, dtype, bias=False)
        self.bn2 = BatchNorm2d(c_out, dtype=dtype)
        self.relu_out = ReLU()
        self.projects = stride != 1 or c_in != c_out
        if self.projects:
            self.skip_conv = Conv2d(c_in, c_out, 1, stride, 0, rng, dtype, bias=False)
            self.skip_bn = BatchNorm2d(c_out, dtype=dtype)

    def _sublayers(self) -> list[Layer]:
        layers = [self.conv1, self.bn1, self.conv2, self.bn2]
        if self.projects:
            layers += [self.skip_conv, self.skip_bn]
        return layers

    def params(self):
        return [p for layer in self._sublayers() for p in layer.params()]

    def grads(self):
        return [g for layer in self._sublayers() for g in layer.grads()]

    def forward(self, x, training):
        main = self.conv1.forward(x, training)
        main = self.bn1.forward(main, training)
        main = self.relu1.forward(main, training)
        main = self.conv2.forward(main, training)
        main = self.bn2.forward(main, training)
        if self.projects:
            skip = self.skip_bn.forward(self.skip_conv.forward(x, training), training)
        else:
            skip = x
        return self.relu_out.forward(main + skip, training)

    def backward(self, dout):
        dsum = self.relu_out.backward(dout)
        dmain = self.bn2.backward(dsum)
        dmain = self.conv2.backward(dmain)
        dmain = self.relu1.backward(dmain)
        dmain = self.bn1.backward(dmain)
        dx = self.conv1.backward(dmain)
        if self.projects:
            dx = dx + self.skip_conv.backward(self.skip_bn.backward(dsum))
        else:
            dx = dx + dsum
        return dx


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean softmax cross-entropy and its gradient w.r.t. the logits."""
    n, k = logits.shape
    if labels.min() < 0 or labels.max() >= k:
        raise ValueError(f"labels outside 0..{k - 1}")
    z = logits - logits.max(axis=1, keepdims=True)
    log_probs = z - np.log(np.sum(np.exp(z), axis=1, keepdims=True))
    loss = float(-np.mean(log_probs[np.arange(n), labels]))
    dlogits = np.exp(log_probs)
    dlogits[np.arange(n), labels] -= 1.0
    return loss, (dlogits / n).astype(logits.dtype)
