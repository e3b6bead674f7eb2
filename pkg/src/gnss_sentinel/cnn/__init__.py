"""Residual CNN for spectrogram images: layers, network, schedule, training."""

from .layers import (
    BatchNorm2d,
    Conv2d,
    GlobalAvgPool,
    Layer,
    Linear,
    ReLU,
    ResidualBlock,
    cross_entropy,
    softmax,
)
from .network import FULL_SCALE_ARCH, CnnArch, Network, analytic_param_count, arch_from_payload
from .schedule import OneCyclePolicy, one_cycle_lr
from .train import (
    EpochStats,
    TrainConfig,
    Trainer,
    load_checkpoint,
    load_model,
    make_policy,
    save_checkpoint,
    steps_per_epoch,
    write_history_csv,
)

__all__ = [
    "BatchNorm2d",
    "Conv2d",
    "GlobalAvgPool",
    "Layer",
    "Linear",
    "ReLU",
    "ResidualBlock",
    "cross_entropy",
    "softmax",
    "CnnArch",
    "FULL_SCALE_ARCH",
    "Network",
    "analytic_param_count",
    "arch_from_payload",
    "OneCyclePolicy",
    "one_cycle_lr",
    "EpochStats",
    "TrainConfig",
    "Trainer",
    "load_checkpoint",
    "load_model",
    "make_policy",
    "save_checkpoint",
    "steps_per_epoch",
    "write_history_csv",
]
