"""SGD training loop with momentum, weight decay, and one-cycle scheduling.

Shuffle order derives from (seed, epoch), velocities and normalization
running stats live in the checkpoint, and batches accumulate in a fixed
order, so a resumed run finishes bit-identical to an uninterrupted one.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DataError, NumericalError
from ..rng import make_rng
from ..serialize import load_document, save_document
from .layers import cross_entropy
from .network import Network, arch_from_payload
from .schedule import OneCyclePolicy, one_cycle_lr


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 15
    batch_size: int = 32
    momentum: float = 0.9
    weight_decay: float = 5e-4
    policy: OneCyclePolicy = field(default_factory=lambda: OneCyclePolicy(lr_max=0.08, total_steps=2))
    seed: int = 0

    def validate(self) -> None:
        if self.epochs < 1:
            raise DataError("epochs must be >= 1")
        if self.batch_size < 1:
            raise DataError("batch_size must be >= 1")


def steps_per_epoch(n: int, batch_size: int) -> int:
    return -(-n // batch_size)


def make_policy(lr_max: float, n_train: int, config_epochs: int, batch_size: int, **kwargs) -> OneCyclePolicy:
    return OneCyclePolicy(lr_max=lr_max, total_steps=config_epochs * steps_per_epoch(n_train, batch_size), **kwargs)


@dataclass
class EpochStats:
    epoch: int
    lr_last: float
    train_loss: float
    val_loss: float
    val_acc: float

    def as_dict(self) -> dict:
        return {
            "epoch": self.epoch,
            "lr_last": self.lr_last,
            "train_loss": self.train_loss,
            "val_loss": self.val_loss,
            "val_acc": self.val_acc,
        }


class Trainer:
    def __init__(self, model: Network, config: TrainConfig):
        config.validate()
        config.policy.validate()
        self.model = model
        self.config = config
        self.velocities = [np.zeros_like(arr) for _, arr in model.params()]
        self.epochs_done = 0
        self.history: list[EpochStats] = []

    def _step(self, images: np.ndarray, labels: np.ndarray, lr: float) -> float:
        loss, grads = self.model.loss_and_grad(images, labels)
        if not np.isfinite(loss):
            raise NumericalError(f"training loss diverged to {loss}")
        wd = self.config.weight_decay
        mom = self.config.momentum
        for (tag, arr), grad, vel in zip(self.model.params(), grads, self.velocities):
            g = grad + wd * arr if tag == "weight" else grad
            vel *= mom
            vel += g
            arr -= (lr * vel).astype(arr.dtype)
        return loss

    def evaluate(self, images: np.ndarray, labels: np.ndarray, batch_size: int = 256) -> tuple[float, float]:
        losses = []
        correct = 0
        for start in range(0, len(images), batch_size):
            chunk = slice(start, start + batch_size)
            logits = self.model.forward(images[chunk], training=False)
            loss, _ = cross_entropy(logits, np.asarray(labels[chunk], dtype=np.int64))
            losses.append(loss * (min(start + batch_size, len(images)) - start))
            correct += int(np.sum(np.argmax(logits, axis=1) == labels[chunk]))
        return float(np.sum(losses) / len(images)), correct / len(images)

    def run_epoch(self, images: np.ndarray, labels: np.ndarray) -> tuple[float, float]:
        """One pass over the training set; returns (mean loss, last lr)."""
        n = len(images)
        spe = steps_per_epoch(n, self.config.batch_size)
        order = make_rng(self.config.seed, "shuffle", self.epochs_done).permutation(n)
        total_loss = 0.0
        lr = 0.0
        for b in range(spe):
            idx = order[b * self.config.batch_size : (b + 1) * self.config.batch_size]
            step = self.epochs_done * spe + b
            lr = one_cycle_lr(self.config.policy, min(step, self.config.policy.total_steps - 1))
            total_loss += self._step(images[idx], labels[idx], lr) * len(idx)
        self.epochs_done += 1
        return total_loss / n, lr

    def train(
        self,
        train_images: np.ndarray,
        train_labels: np.ndarray,
        val_images: np.ndarray,
        val_labels: np.ndarray,
        checkpoint_path: str | Path | None = None,
        max_epochs_this_run: int | None = None,
    ) -> list[EpochStats]:
        """Run (the rest of) the training plan; optionally stop early with a
        resumable checkpoint after ``max_epochs_this_run`` epochs."""
        if len(train_images) == 0 or len(val_images) == 0:
            raise DataError("training and validation sets must be non-empty")
        train_labels = np.asarray(train_labels, dtype=np.int64)
        val_labels = np.asarray(val_labels, dtype=np.int64)
        target = self.config.epochs
        if max_epochs_this_run is not None:
            target = min(target, self.epochs_done + max_epochs_this_run)
        while self.epochs_done < target:
            train_loss, lr_last = self.run_epoch(train_images, train_labels)
            val_loss, val_acc = self.evaluate(val_images, val_labels)
            self.history.append(EpochStats(self.epochs_done, lr_last, train_loss, val_loss, val_acc))
            if checkpoint_path is not None:
                save_checkpoint(checkpoint_path, self)
        return self.history


_CHECKPOINT_KIND = "cnn-checkpoint"


def save_checkpoint(path: str | Path, trainer: Trainer) -> Path:
    payload = {
        "model": trainer.model.state_payload(),
        "velocities": [v.astype(np.float64).tolist() for v in trainer.velocities],
        "epochs_done": trainer.epochs_done,
        "history": [h.as_dict() for h in trainer.history],
        "config": {
            "epochs": trainer.config.epochs,
            "batch_size": trainer.config.batch_size,
            "momentum": trainer.config.momentum,
            "weight_decay": trainer.config.weight_decay,
            "seed": trainer.config.seed,
            "policy": {
                "lr_max": trainer.config.policy.lr_max,
                "total_steps": trainer.config.policy.total_steps,
                "pct_warmup": trainer.config.policy.pct_warmup,
                "div_factor": trainer.config.policy.div_factor,
                "final_div_factor": trainer.config.policy.final_div_factor,
            },
        },
    }
    return save_document(path, _CHECKPOINT_KIND, payload)


def load_checkpoint(path: str | Path, dtype=np.float32) -> Trainer:
    payload = load_document(path, _CHECKPOINT_KIND)
    arch = arch_from_payload(payload["model"]["arch"])
    model = Network(arch, seed=payload["model"]["seed"], dtype=dtype)
    model.load_state_payload(payload["model"])
    cfg = payload["config"]
    config = TrainConfig(
        epochs=cfg["epochs"],
        batch_size=cfg["batch_size"],
        momentum=cfg["momentum"],
        weight_decay=cfg["weight_decay"],
        policy=OneCyclePolicy(**cfg["policy"]),
        seed=cfg["seed"],
    )
    trainer = Trainer(model, config)
    for vel, values in zip(trainer.velocities, payload["velocities"]):
        vel[...] = np.asarray(values, dtype=dtype)
    trainer.epochs_done = payload["epochs_done"]
    trainer.history = [EpochStats(**h) for h in payload["history"]]
    return trainer


def load_model(path: str | Path, dtype=np.float32) -> Network:
    return load_checkpoint(path, dtype).model


def write_history_csv(path: str | Path, history: list[EpochStats]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "lr_last", "train_loss", "val_loss", "val_acc"])
        for h in history:
            writer.writerow([h.epoch, repr(h.lr_last), repr(h.train_loss), repr(h.val_loss), repr(h.val_acc)])
    return path
