"""Residual convolutional classifier for single-channel spectrogram images.

Topology: 3x3 stem convolution + ReLU, a sequence of residual stages
(stride-2 entry between stages), global average pooling, linear head.
The pooled activations are the embedding used for feature extraction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from ..rng import make_rng
from .layers import (
    Conv2d,
    GlobalAvgPool,
    Linear,
    ReLU,
    ResidualBlock,
    cross_entropy,
    softmax,
)


@dataclass(frozen=True)
class CnnArch:
    input_hw: tuple[int, int] = (64, 64)
    in_channels: int = 1
    stem_channels: int = 16
    stage_channels: tuple[int, ...] = (16, 32, 64)
    blocks_per_stage: int = 1
    n_classes: int = 6

    @property
    def embedding_dim(self) -> int:
        return self.stage_channels[-1]

    def validate(self) -> None:
        h, w = self.input_hw
        downsamples = len(self.stage_channels) - 1
        if h // (2**downsamples) < 1 or w // (2**downsamples) < 1:
            raise DataError(f"input {self.input_hw} collapses after {downsamples} downsamples")
        if self.n_classes < 2:
            raise DataError("n_classes must be >= 2")


# Larger preset for full-scale runs; the default above is sized for desk
# benchmarks where a multi-million-parameter network buys nothing.
FULL_SCALE_ARCH = CnnArch(stage_channels=(64, 128, 256, 512), blocks_per_stage=2)


def analytic_param_count(arch: CnnArch) -> int:
    """Closed-form parameter count for the constructed topology."""

    def conv(c_in, c_out, k, bias=True):
        return c_out * c_in * k * k + (c_out if bias else 0)

    def bn(ch):
        return 2 * ch

    total = conv(arch.in_channels, arch.stem_channels, 3)
    c_prev = arch.stem_channels
    for stage_idx, c in enumerate(arch.stage_channels):
        for block_idx in range(arch.blocks_per_stage):
            c_in = c_prev if block_idx == 0 else c
            projects = (stage_idx > 0 and block_idx == 0) or c_in != c
            total += conv(c_in, c, 3, bias=False) + bn(c) + conv(c, c, 3, bias=False) + bn(c)
            if projects:
                total += conv(c_in, c, 1, bias=False) + bn(c)
        c_prev = c
    total += arch.embedding_dim * arch.n_classes + arch.n_classes
    return total


class Network:
    def __init__(self, arch: CnnArch, seed: int, dtype=np.float32, zero_head: bool = False):
        arch.validate()
        self.arch = arch
        self.seed = seed
        self.dtype = dtype
        rng = make_rng(seed, "init")
        self.stem = Conv2d(arch.in_channels, arch.stem_channels, 3, 1, 1, rng, dtype)
        self.stem_relu = ReLU()
        self.blocks: list[ResidualBlock] = []
        c_prev = arch.stem_channels
        for stage_idx, c in enumerate(arch.stage_channels):
            for block_idx in range(arch.blocks_per_stage):
                stride = 2 if (stage_idx > 0 and block_idx == 0) else 1
                c_in = c_prev if block_idx == 0 else c
                self.blocks.append(ResidualBlock(c_in, c, stride, rng, dtype))
            c_prev = c
        self.pool = GlobalAvgPool()
        self.head = Linear(arch.embedding_dim, arch.n_classes, rng, dtype, zero_init=zero_head)

    # -- parameter plumbing -------------------------------------------------

    def _layers(self):
        return [self.stem, *self.blocks, self.head]

    def params(self) -> list[tuple[str, np.ndarray]]:
        return [p for layer in self._layers() for p in layer.params()]

    def grads(self) -> list[np.ndarray]:
        return [g for layer in self._layers() for g in layer.grads()]

    def param_count(self) -> int:
        return sum(int(np.prod(arr.shape)) for _, arr in self.params())

    def bn_stats(self) -> list[np.ndarray]:
        stats = []
        for block in self.blocks:
            norms = [block.bn1, block.bn2] + ([block.skip_bn] if block.projects else [])
            for bn in norms:
                stats += [bn.running_mean, bn.running_var]
        return stats

    # -- computation ---------------------------------------------------------

    def _check_images(self, images: np.ndarray) -> np.ndarray:
        images = np.asarray(images)
        expect = (self.arch.in_channels, *self.arch.input_hw)
        if images.ndim != 4 or images.shape[1:] != expect:
            raise DataError(f"expected images shaped (n, {expect[0]}, {expect[1]}, {expect[2]}), got {images.shape}")
        return images.astype(self.dtype, copy=False)

    def embed(self, images: np.ndarray, training: bool = False) -> np.ndarray:
        x = self._check_images(images)
        x = self.stem_relu.forward(self.stem.forward(x, training), training)
        for block in self.blocks:
            x = block.forward(x, training)
        return self.pool.forward(x, training)

    def forward(self, images: np.ndarray, training: bool = False) -> np.ndarray:
        """Class logits, shape (n, n_classes)."""
        return self.head.forward(self.embed(images, training), training)

    def loss_and_grad(self, images: np.ndarray, labels: np.ndarray) -> tuple[float, list[np.ndarray]]:
        """Mean cross-entropy and gradients for every parameter (training mode)."""
        labels = np.asarray(labels, dtype=np.int64)
        if len(labels) and (labels.min() < 0 or labels.max() >= self.arch.n_classes):
            raise DataError(f"labels outside 0..{self.arch.n_classes - 1}")
        logits = self.forward(images, training=True)
        loss, dlogits = cross_entropy(logits, labels)
        dx = self.head.backward(dlogits)
        dx = self.pool.backward(dx)
        for block in reversed(self.blocks):
            dx = block.backward(dx)
        dx = self.stem_relu.backward(dx)
        self.stem.backward(dx)
        return loss, self.grads()

    def predict_proba(self, images: np.ndarray, batch_size: int = 256) -> np.ndarray:
        if len(images) == 0:
            return np.zeros((0, self.arch.n_classes))
        out = []
        for start in range(0, len(images), batch_size):
            out.append(softmax(self.forward(images[start : start + batch_size], training=False)))
        return np.vstack(out)

    def predict(self, images: np.ndarray, batch_size: int = 256) -> np.ndarray:
        return np.argmax(self.predict_proba(images, batch_size), axis=1)

    def extract_features(self, images: np.ndarray, batch_size: int = 256) -> np.ndarray:
        """Global-average-pooled penultimate activations, (n, embedding_dim)."""
        out = []
        for start in range(0, len(images), batch_size):
            out.append(self.embed(images[start : start + batch_size], training=False))
        return np.vstack(out)

    # -- serialization --------------------------------------------------------

    def state_payload(self) -> dict:
        return {
            "arch": {
                "input_hw": list(self.arch.input_hw),
                "in_channels": self.arch.in_channels,
                "stem_channels": self.arch.stem_channels,
                "stage_channels": list(self.arch.stage_channels),
                "blocks_per_stage": self.arch.blocks_per_stage,
                "n_classes": self.arch.n_classes,
            },
            "seed": self.seed,
            "params": [arr.astype(np.float64).tolist() for _, arr in self.params()],
            "bn_stats": [arr.astype(np.float64).tolist() for arr in self.bn_stats()],
        }

    def load_state_payload(self, payload: dict) -> None:
        params = self.params()
        stored = payload["params"]
        if len(stored) != len(params):
            raise DataError(f"checkpoint has {len(stored)} parameter arrays, model needs {len(params)}")
        for (_, arr), values in zip(params, stored):
            new = np.asarray(values, dtype=self.dtype)
            if new.shape != arr.shape:
                raise DataError(f"checkpoint array shape {new.shape} != model {arr.shape}")
            arr[...] = new
        for arr, values in zip(self.bn_stats(), payload["bn_stats"]):
            arr[...] = np.asarray(values, dtype=self.dtype)


def arch_from_payload(data: dict) -> CnnArch:
    return CnnArch(
        input_hw=tuple(data["input_hw"]),
        in_channels=data["in_channels"],
        stem_channels=data["stem_channels"],
        stage_channels=tuple(data["stage_channels"]),
        blocks_per_stage=data["blocks_per_stage"],
        n_classes=data["n_classes"],
    )
