"""Command line interface.

Subcommands: synth, spectrogram, train-tabular, train-image, evaluate,
grid-search, report. Global flags: --config, --seed, --out, --threads.
Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
The GNSS_SENTINEL_SEED environment variable overrides the config seed;
an explicit --seed flag overrides both.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, classical
from ._memtune import tune_allocator
from .config import RunConfig, load_config
from .datasets import (
    JammingSetConfig,
    build_jamming_images,
    load_pgm_tree,
    spectrogram_tree,
    split_by_class,
    synth_iq_tree,
    to_model_input,
)
from .errors import DataError, NumericalError, UsageError
from .manifest import Manifest, StageTimer
from .metrics import grid_search
from .reporting import rerender_report, write_accuracy_bars, write_eval_report
from .rng import derive_seed, make_rng
from .signals import JamClass
from .tabular import SpoofClass, TabularDataset, load_csv, stratified_split, synth_spoof_dataset


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="gnss-sentinel", description="GNSS interference detection toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--seed", type=int, help="master seed (overrides config and environment)")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--threads", type=int, help="worker threads (reserved; outputs never depend on it)")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("synth", help="generate labeled IQ files for the six jamming classes")
    sub.add_parser("spectrogram", help="convert an IQ tree to spectrogram images")
    sub.add_parser("train-tabular", help="run the spoofing-detection experiment")
    sub.add_parser("train-image", help="train the jamming CNN")
    p_eval = sub.add_parser("evaluate", help="evaluate a saved model on a dataset")
    p_eval.add_argument("--model", required=True, help="model or checkpoint file")
    p_eval.add_argument("--data", required=True, help="CSV file or PGM directory tree")
    p_grid = sub.add_parser("grid-search", help="cross-validated grid search for one classifier kind")
    p_grid.add_argument("--kind", required=True, help="classifier kind")
    p_report = sub.add_parser("report", help="re-render SVG plots from report CSVs")
    p_report.add_argument("--dir", required=True, help="report directory")
    return parser


def _jamming_set_config(config: RunConfig) -> JammingSetConfig:
    synth = config.section("synth")
    spect = config.section("spectrogram")
    return JammingSetConfig(
        signals_per_class=int(synth["signals_per_class"]),
        sample_rate_hz=float(synth["sample_rate_hz"]),
        duration_s=float(synth["duration_s"]),
        jsr_db_min=float(synth["jsr_db_min"]),
        jsr_db_max=float(synth["jsr_db_max"]),
        stft=config.stft_config(),
        image_size=int(spect["image_size"]),
    )


def cmd_synth(config: RunConfig) -> int:
    out_dir = config.synth_dir()
    out_dir.mkdir(parents=True, exist_ok=True)
    selected = config.section("synth")["classes"]
    classes = [JamClass.from_label(name) for name in selected] if selected is not None else None
    timer = StageTimer()
    files = synth_iq_tree(_jamming_set_config(config), derive_seed(config.seed, "synth"), out_dir, classes)
    all_files = files + [Path(str(f) + ".meta") for f in files]
    manifest = Manifest(config.raw, config.threads)
    manifest.record_stage("synth", all_files, out_dir, timer.seconds())
    config.out_dir.mkdir(parents=True, exist_ok=True)
    manifest.write(config.out_dir / "manifest-synth.json")
    print(f"wrote {len(files)} IQ files under {out_dir}")
    return 0


def cmd_spectrogram(config: RunConfig) -> int:
    in_dir, out_dir = config.spectrogram_dirs()
    spect = config.section("spectrogram")
    timer = StageTimer()
    files = spectrogram_tree(in_dir, config.stft_config(), int(spect["image_size"]), out_dir)
    manifest = Manifest(config.raw, config.threads)
    manifest.record_stage("spectrogram", files, out_dir, timer.seconds())
    config.out_dir.mkdir(parents=True, exist_ok=True)
    manifest.write(config.out_dir / "manifest-spectrogram.json")
    print(f"wrote {len(files)} spectrogram images under {out_dir}")
    return 0


def _tabular_dataset(config: RunConfig, seed: int) -> TabularDataset:
    tab = config.section("tabular")
    if tab["source"] == "synthetic":
        ds = synth_spoof_dataset(int(tab["n_per_class"]), float(tab["difficulty"]), derive_seed(seed, "spoof-data"))
        ratios = [float(r) for r in tab["imbalance"]]
        peak = max(ratios)
        keep_parts = []
        for cls in sorted(np.unique(ds.y)):
            members = np.flatnonzero(ds.y == cls)
            target = int(round(len(members) * ratios[int(cls)] / peak))
            order = make_rng(seed, "imbalance", int(cls)).permutation(len(members))
            keep_parts.append(members[order[:target]])
        return ds.subset(np.concatenate(keep_parts))
    return load_csv(tab["source"])


def _apply_balance(ds: TabularDataset, method: str, smote_k: int, seed: int) -> TabularDataset:
    from .balance import random_oversample, random_undersample, smote

    if method == "none":
        return ds
    if method == "undersample":
        return random_undersample(ds, derive_seed(seed, "balance"))
    if method == "oversample":
        return random_oversample(ds, derive_seed(seed, "balance"))
    return smote(ds, k=smote_k, seed=derive_seed(seed, "balance"))


def cmd_train_tabular(config: RunConfig) -> int:
    tab = config.section("tabular")
    seed = derive_seed(config.seed, "tabular")
    timer = StageTimer()
    ds = _tabular_dataset(config, seed)
    if tab["balance_scope"] == "full":
        ds = _apply_balance(ds, tab["balance"], int(tab["smote_k"]), seed)
    train, test = stratified_split(ds, float(tab["train_fraction"]), derive_seed(seed, "split"))
    if tab["balance_scope"] == "train":
        train = _apply_balance(train, tab["balance"], int(tab["smote_k"]), seed)

    out_dir = config.out_dir
    reports = out_dir / "reports"
    reports.mkdir(parents=True, exist_ok=True)
    class_names = [c.name.lower() for c in SpoofClass]
    accuracies: dict[str, tuple[float, float]] = {}
    log_lines: list[str] = []
    best = None  # (validation acc, kind, model)
    for kind in config.tabular_kinds():
        grid = config.grid_for(kind)
        result = grid_search(
            kind,
            grid,
            train,
            n_splits=int(tab["cv_splits"]),
            test_fraction=float(tab["cv_test_fraction"]),
            seed=derive_seed(seed, "cv", kind.value),
        )
        model = classical.fit(kind, result.best_hyper, train, seed=derive_seed(seed, "fit", kind.value))
        test_acc = float(np.mean(model.predict(test.X) == test.y))
        accuracies[kind.value] = (result.best_mean_accuracy, test_acc)
        log_lines.append(f"== {kind.value}")
        log_lines.extend(result.log_lines())
        log_lines.append(f"test accuracy: {test_acc:.4f}")
        print(f"{kind.value}: validation {result.best_mean_accuracy:.4f}  test {test_acc:.4f}")
        if best is None or result.best_mean_accuracy > best[0]:
            best = (result.best_mean_accuracy, kind, model)

    assert best is not None
    _, best_kind, best_model = best
    model_path = out_dir / "model.json"
    classical.save_model(model_path, best_model)
    proba = best_model.predict_proba(test.X)
    write_eval_report(reports, test.y, proba, class_names)
    write_accuracy_bars(reports, accuracies, "validation vs test accuracy")
    with (reports / "accuracy_summary.csv").open("w") as fh:
        fh.write("kind,validation_accuracy,test_accuracy\n")
        for kind_name, (va, ta) in accuracies.items():
            fh.write(f"{kind_name},{va!r},{ta!r}\n")
    (reports / "grid_log.txt").write_text("\n".join(log_lines) + "\n")
    print(f"best model: {best_kind.value} -> {model_path}")

    manifest = Manifest(config.raw, config.threads)
    files = [model_path] + sorted(reports.rglob("*.*"))
    manifest.record_stage("train-tabular", files, out_dir, timer.seconds())
    manifest.write(out_dir / "manifest-train-tabular.json")
    return 0


def _image_dataset(config: RunConfig, seed: int) -> tuple[np.ndarray, np.ndarray, list[str]]:
    img = config.section("image")
    if img["source"] == "synthetic":
        pixels, labels = build_jamming_images(_jamming_set_config(config), derive_seed(seed, "synth"))
        names = [c.label for c in JamClass]
    else:
        pixels, labels, names = load_pgm_tree(img["source"])
    return pixels, labels, names


def cmd_train_image(config: RunConfig) -> int:
    from .cnn import CnnArch, FULL_SCALE_ARCH, Network, Trainer, TrainConfig, load_checkpoint, make_policy, write_history_csv

    img = config.section("image")
    seed = derive_seed(config.seed, "image")
    timer = StageTimer()
    pixels, labels, names = _image_dataset(config, seed)
    fractions = tuple(float(f) for f in img["fractions"])
    train_idx, val_idx, test_idx = split_by_class(labels, fractions, derive_seed(seed, "split"))
    if min(len(train_idx), len(val_idx), len(test_idx)) == 0:
        raise DataError(
            f"split {fractions} of {len(labels)} images leaves an empty subset; provide more images"
        )
    X = to_model_input(pixels)
    x_train, y_train = X[train_idx], labels[train_idx]
    x_val, y_val = X[val_idx], labels[val_idx]
    x_test, y_test = X[test_idx], labels[test_idx]
    print(f"images: train {len(train_idx)}, val {len(val_idx)}, test {len(test_idx)}")

    out_dir = config.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    checkpoint_path = out_dir / "checkpoint.json"
    epochs = int(img["epochs"])
    batch_size = int(img["batch_size"])
    if img["resume_from"]:
        trainer = load_checkpoint(img["resume_from"])
        print(f"resumed from {img['resume_from']} at epoch {trainer.epochs_done}")
    else:
        size = pixels.shape[1]
        if img["arch"] == "full":
            arch = CnnArch(
                input_hw=(size, size),
                stem_channels=FULL_SCALE_ARCH.stem_channels,
                stage_channels=FULL_SCALE_ARCH.stage_channels,
                blocks_per_stage=FULL_SCALE_ARCH.blocks_per_stage,
                n_classes=len(names),
            )
        else:
            arch = CnnArch(input_hw=(size, size), n_classes=len(names))
        model = Network(arch, seed=derive_seed(seed, "init"))
        policy = make_policy(
            float(img["lr_max"]),
            len(train_idx),
            epochs,
            batch_size,
            pct_warmup=float(img["pct_warmup"]),
            div_factor=float(img["div_factor"]),
            final_div_factor=float(img["final_div_factor"]),
        )
        train_config = TrainConfig(
            epochs=epochs,
            batch_size=batch_size,
            momentum=float(img["momentum"]),
            weight_decay=float(img["weight_decay"]),
            policy=policy,
            seed=derive_seed(seed, "train"),
        )
        trainer = Trainer(model, train_config)
    stop_after = img["stop_after_epoch"]
    checkpoint = checkpoint_path if img["checkpoint_every_epoch"] else None
    history = trainer.train(
        x_train,
        y_train,
        x_val,
        y_val,
        checkpoint_path=checkpoint,
        max_epochs_this_run=int(stop_after) if stop_after is not None else None,
    )
    if checkpoint is None:
        from .cnn import save_checkpoint

        save_checkpoint(checkpoint_path, trainer)
    for h in history:
        print(f"epoch {h.epoch:3d}: lr {h.lr_last:.5f} train {h.train_loss:.4f} val {h.val_loss:.4f} acc {h.val_acc:.4f}")
    write_history_csv(out_dir / "history.csv", trainer.history)

    reports = out_dir / "reports"
    proba = trainer.model.predict_proba(x_test)
    summary = write_eval_report(reports, y_test, proba, names)
    print(f"test accuracy {summary['accuracy']:.4f}, macro AUC {summary['macro_auc']:.4f}")

    manifest = Manifest(config.raw, config.threads)
    files = [checkpoint_path, out_dir / "history.csv"] + sorted(reports.rglob("*.*"))
    manifest.record_stage("train-image", files, out_dir, timer.seconds())
    manifest.write(out_dir / "manifest-train-image.json")
    return 0


def cmd_evaluate(config: RunConfig, model_path: str, data_path: str) -> int:
    doc_kind = None
    try:
        doc = json.loads(Path(model_path).read_text())
        doc_kind = doc.get("kind")
    except FileNotFoundError:
        raise DataError(f"{model_path}: no such file") from None
    except json.JSONDecodeError:
        raise DataError(f"{model_path}: not a model document") from None

    data = Path(data_path)
    reports = config.out_dir / "eval-report"
    if doc_kind == "classical-model":
        model = classical.load_model(model_path)
        if data.is_dir():
            raise DataError("classical models evaluate CSV datasets, got a directory")
        ds = load_csv(data)
        if tuple(model.schema) != tuple(ds.schema):
            raise DataError(f"model schema {model.schema} does not match dataset schema {ds.schema}")
        proba = model.predict_proba(ds.X)
        y_eval = np.searchsorted(model.classes, ds.y)
        if not np.array_equal(model.classes[np.clip(y_eval, 0, len(model.classes) - 1)], ds.y):
            raise DataError("dataset contains labels unknown to the model")
        summary = write_eval_report(reports, y_eval, proba, [str(c) for c in model.classes])
    elif doc_kind == "cnn-checkpoint":
        from .cnn import load_model as load_cnn

        model = load_cnn(model_path)
        if not data.is_dir():
            raise DataError("CNN checkpoints evaluate PGM directory trees, got a file")
        pixels, labels, names = load_pgm_tree(data)
        expect_hw = model.arch.input_hw
        if pixels.shape[1:] != expect_hw:
            raise DataError(f"images are {pixels.shape[1:]}, model expects {expect_hw}")
        if len(names) != model.arch.n_classes:
            raise DataError(f"{len(names)} classes on disk, model has {model.arch.n_classes}")
        proba = model.predict_proba(to_model_input(pixels))
        summary = write_eval_report(reports, labels, proba, names)
    else:
        raise DataError(f"{model_path}: unsupported document kind {doc_kind!r}")
    print(f"accuracy {summary['accuracy']:.4f}, macro AUC {summary['macro_auc']:.4f} -> {reports}")
    return 0


def cmd_grid_search(config: RunConfig, kind_text: str) -> int:
    kind = classical.ClassifierKind.from_text(kind_text)
    tab = config.section("tabular")
    seed = derive_seed(config.seed, "tabular")
    ds = _tabular_dataset(config, seed)
    result = grid_search(
        kind,
        config.grid_for(kind),
        ds,
        n_splits=int(tab["cv_splits"]),
        test_fraction=float(tab["cv_test_fraction"]),
        seed=derive_seed(seed, "cv", kind.value),
    )
    config.out_dir.mkdir(parents=True, exist_ok=True)
    out_path = config.out_dir / f"gridsearch-{kind.value}.json"
    payload = {
        "kind": kind.value,
        "best_index": result.best_index,
        "best_mean_accuracy": result.best_mean_accuracy,
        "candidates": [
            {
                "index": c.index,
                "hyper": c.hyper_dict,
                "mean_accuracy": c.mean_accuracy,
                "std_accuracy": c.std_accuracy,
                "fold_accuracies": c.fold_accuracies,
                "error": c.error,
            }
            for c in result.candidates
        ],
    }
    out_path.write_text(json.dumps(payload, indent=2, sort_keys=True))
    for line in result.log_lines():
        print(line)
    print(f"selection written to {out_path}")
    return 0


def cmd_report(report_dir: str) -> int:
    written = rerender_report(report_dir)
    print(f"re-rendered {len(written)} plots in {report_dir}")
    return 0


def main(argv: list[str] | None = None) -> int:
    tune_allocator()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(
            args.config,
            seed_override=args.seed,
            out_override=args.out,
            threads_override=args.threads,
            env_seed=os.environ.get("GNSS_SENTINEL_SEED"),
        )
        if args.command == "synth":
            return cmd_synth(config)
        if args.command == "spectrogram":
            return cmd_spectrogram(config)
        if args.command == "train-tabular":
            return cmd_train_tabular(config)
        if args.command == "train-image":
            return cmd_train_image(config)
        if args.command == "evaluate":
            return cmd_evaluate(config, args.model, args.data)
        if args.command == "grid-search":
            return cmd_grid_search(config, args.kind)
        if args.command == "report":
            return cmd_report(args.dir)
        raise UsageError(f"unknown command {args.command}")  # pragma: no cover
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
