"""Run configuration: a JSON key-value tree with per-command sections.

Documented defaults live here; a config file only overrides what it names.
Section layout::

    {
      "seed": 42,                  // master seed (env/flag can override)
      "out_dir": "runs/demo",
      "threads": 1,                // reserved; outputs never depend on it
      "synth": { ... },            // jamming IQ synthesis
      "spectrogram": { ... },      // STFT + image conversion
      "tabular": { ... },          // spoofing-detection experiment
      "image": { ... }             // jamming CNN experiment
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .classical import ClassifierKind, default_hyper, hyper_from_dict
from .errors import DataError, UsageError
from .spectrogram import StftConfig, Window


def _merge(defaults: dict, overrides: dict, context: str) -> dict:
    out = dict(defaults)
    for key, value in overrides.items():
        if key not in defaults:
            raise UsageError(f"unknown config key {context}.{key}")
        if isinstance(defaults[key], dict) and defaults[key] and isinstance(value, dict):
            out[key] = _merge(defaults[key], value, f"{context}.{key}")
        else:
            out[key] = value
    return out


_DEFAULTS: dict = {
    "seed": 0,
    "out_dir": "runs/out",
    "threads": 1,
    "synth": {
        "signals_per_class": 60,
        "sample_rate_hz": 4_096_000.0,
        "duration_s": 0.002,
        "jsr_db_min": 0.0,
        "jsr_db_max": 10.0,
        "classes": None,  # all six; or a list of class names
        "out_dir": None,  # default <out_dir>/iq
    },
    "spectrogram": {
        "n_fft": 256,
        "hop": 128,
        "window": "hann",
        "image_size": 64,
        "in_dir": None,  # default <out_dir>/iq
        "out_dir": None,  # default <out_dir>/images
    },
    "tabular": {
        "source": "synthetic",  # or a CSV path
        "n_per_class": 2000,
        "difficulty": 0.5,
        "imbalance": [10, 5, 2, 1],
        "balance": "undersample",  # undersample | oversample | smote | none
        "balance_scope": "train",  # train | full
        "smote_k": 5,
        "train_fraction": 0.70,
        "cv_splits": 5,
        "cv_test_fraction": 0.2,
        "kinds": "all",
        "grids": {},
    },
    "image": {
        "source": "synthetic",  # or a PGM-tree path
        "fractions": [0.75, 0.125, 0.125],  # train/val/test, 6:1:1
        "arch": "desk",  # desk | full
        "epochs": 15,
        "batch_size": 32,
        "lr_max": 0.08,
        "momentum": 0.9,
        "weight_decay": 5e-4,
        "pct_warmup": 0.3,
        "div_factor": 25.0,
        "final_div_factor": 1e4,
        "resume_from": None,
        "checkpoint_every_epoch": True,
        "stop_after_epoch": None,  # pause a long plan; resume continues it
    },
}

_BALANCE_METHODS = ("undersample", "oversample", "smote", "none")


# Hyperparameter grids used when the config does not override them. These
# are toolkit defaults, declared here, not taken from any publication.
_DEFAULT_GRIDS: dict[ClassifierKind, list[dict]] = {
    ClassifierKind.LOGISTIC_REGRESSION: [
        {"lr": 0.1, "l2": 1e-3, "max_iter": 300, "tol": 1e-6},
        {"lr": 0.1, "l2": 1e-2, "max_iter": 300, "tol": 1e-6},
    ],
    ClassifierKind.KNN: [{"k": 3}, {"k": 5}, {"k": 9}],
    ClassifierKind.GAUSSIAN_NB: [{"var_smoothing": 1e-9}, {"var_smoothing": 1e-6}],
    ClassifierKind.LINEAR_SVM: [
        {"l2": 1e-3, "epochs": 150, "lr": 0.1},
        {"l2": 1e-2, "epochs": 150, "lr": 0.1},
    ],
    ClassifierKind.DECISION_TREE: [
        {"max_depth": 4, "min_samples_split": 2, "min_impurity_decrease": 0.0},
        {"max_depth": 6, "min_samples_split": 2, "min_impurity_decrease": 0.0},
    ],
    ClassifierKind.RANDOM_FOREST: [
        {"n_trees": 30, "max_features": 4, "bootstrap": True, "tree": {"max_depth": 8}},
        {"n_trees": 30, "max_features": 4, "bootstrap": True, "tree": {"max_depth": 14}},
    ],
    ClassifierKind.GRADIENT_BOOSTING: [
        {"n_rounds": 80, "learning_rate": 0.2, "max_depth": 3, "subsample": 1.0},
        {"n_rounds": 150, "learning_rate": 0.1, "max_depth": 3, "subsample": 1.0},
        {"n_rounds": 80, "learning_rate": 0.2, "max_depth": 2, "subsample": 1.0},
    ],
}


@dataclass
class RunConfig:
    raw: dict

    @property
    def seed(self) -> int:
        return int(self.raw["seed"])

    @property
    def out_dir(self) -> Path:
        return Path(self.raw["out_dir"])

    @property
    def threads(self) -> int:
        return int(self.raw["threads"])

    def section(self, name: str) -> dict:
        return self.raw[name]

    def stft_config(self) -> StftConfig:
        spect = self.raw["spectrogram"]
        window = {"hann": Window.HANN, "rectangular": Window.RECTANGULAR}.get(str(spect["window"]).lower())
        if window is None:
            raise UsageError(f"unknown window {spect['window']!r}; valid: hann, rectangular")
        return StftConfig(n_fft=int(spect["n_fft"]), hop=int(spect["hop"]), window=window)

    def synth_dir(self) -> Path:
        configured = self.raw["synth"]["out_dir"]
        return Path(configured) if configured else self.out_dir / "iq"

    def spectrogram_dirs(self) -> tuple[Path, Path]:
        spect = self.raw["spectrogram"]
        in_dir = Path(spect["in_dir"]) if spect["in_dir"] else self.out_dir / "iq"
        out_dir = Path(spect["out_dir"]) if spect["out_dir"] else self.out_dir / "images"
        return in_dir, out_dir

    def tabular_kinds(self) -> list[ClassifierKind]:
        kinds = self.raw["tabular"]["kinds"]
        if kinds == "all":
            return list(ClassifierKind)
        return [ClassifierKind.from_text(k) for k in kinds]

    def grid_for(self, kind: ClassifierKind) -> list:
        grids = self.raw["tabular"]["grids"]
        if kind.value in grids:
            return [hyper_from_dict(kind, entry) for entry in grids[kind.value]]
        return [hyper_from_dict(kind, entry) for entry in _DEFAULT_GRIDS[kind]]

    def validate(self) -> None:
        tab = self.raw["tabular"]
        if tab["balance"] not in _BALANCE_METHODS:
            raise UsageError(f"tabular.balance must be one of {_BALANCE_METHODS}")
        if tab["balance_scope"] not in ("train", "full"):
            raise UsageError("tabular.balance_scope must be 'train' or 'full'")
        if not (0.0 < float(tab["train_fraction"]) < 1.0):
            raise UsageError("tabular.train_fraction must be in (0, 1)")
        if len(tab["imbalance"]) != 4 or any(r <= 0 for r in tab["imbalance"]):
            raise UsageError("tabular.imbalance must be 4 positive ratios")
        img = self.raw["image"]
        fractions = img["fractions"]
        if len(fractions) != 3 or abs(sum(fractions) - 1.0) > 1e-9:
            raise UsageError("image.fractions must be 3 values summing to 1")
        if img["arch"] not in ("desk", "full"):
            raise UsageError("image.arch must be 'desk' or 'full'")
        self.stft_config().validate()
        if self.raw["tabular"]["source"] != "synthetic":
            path = Path(self.raw["tabular"]["source"])
            if not path.exists():
                raise DataError(f"tabular.source {path} does not exist")
        if self.raw["image"]["source"] != "synthetic":
            path = Path(self.raw["image"]["source"])
            if not path.exists():
                raise DataError(f"image.source {path} does not exist")


def load_config(path: str | Path | None, seed_override: int | None = None, out_override: str | None = None, threads_override: int | None = None, env_seed: str | None = None) -> RunConfig:
    """Merge file config over defaults; apply seed/out/threads overrides.

    Seed precedence: --seed flag, then GNSS_SENTINEL_SEED, then config file.
    """
    raw: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise UsageError(f"config file {path} not found") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {path}: invalid JSON ({exc})") from None
        if not isinstance(raw, dict):
            raise UsageError(f"config file {path}: expected a JSON object")
    merged = _merge(_DEFAULTS, raw, "config")
    if env_seed is not None:
        try:
            merged["seed"] = int(env_seed)
        except ValueError:
            raise UsageError(f"GNSS_SENTINEL_SEED={env_seed!r} is not an integer") from None
    if seed_override is not None:
        merged["seed"] = seed_override
    if out_override is not None:
        merged["out_dir"] = out_override
    if threads_override is not None:
        merged["threads"] = threads_override
    config = RunConfig(merged)
    config.validate()
    return config


def default_grid(kind: ClassifierKind) -> list:
    return [hyper_from_dict(kind, entry) for entry in _DEFAULT_GRIDS[kind]]


__all__ = ["RunConfig", "load_config", "default_grid", "default_hyper"]
