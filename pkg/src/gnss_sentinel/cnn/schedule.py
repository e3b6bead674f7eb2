"""One-cycle learning rate schedule: linear warmup, cosine annealing."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import DataError


@dataclass(frozen=True)
class OneCyclePolicy:
    lr_max: float
    total_steps: int
    pct_warmup: float = 0.3
    div_factor: float = 25.0
    final_div_factor: float = 1e4

    def validate(self) -> None:
        if self.total_steps < 2:
            raise DataError(f"total_steps must be >= 2, got {self.total_steps}")
        if not (0.0 < self.pct_warmup < 1.0):
            raise DataError(f"pct_warmup must be in (0, 1), got {self.pct_warmup}")
        for name in ("lr_max", "div_factor", "final_div_factor"):
            if getattr(self, name) <= 0:
                raise DataError(f"{name} must be positive")


def one_cycle_lr(policy: OneCyclePolicy, step: int) -> float:
    """Learning rate at a given optimizer step.

    Linear ramp from lr_max/div_factor to lr_max over ceil(pct_warmup *
    total_steps) steps, then cosine annealing down to
    lr_max/final_div_factor at the last step.
    """
    policy.validate()
    total = policy.total_steps
    if not (0 <= step < total):
        raise DataError(f"step {step} outside 0..{total - 1}")
    warmup = min(math.ceil(policy.pct_warmup * total), total - 1)
    lr_start = policy.lr_max / policy.div_factor
    lr_end = policy.lr_max / policy.final_div_factor
    if step <= warmup:
        return lr_start + (policy.lr_max - lr_start) * (step / warmup if warmup > 0 else 1.0)
    progress = (step - warmup) / (total - 1 - warmup)
    return lr_end + (policy.lr_max - lr_end) * 0.5 * (1.0 + math.cos(math.pi * progress))
