"""Command line surface: subcommands, exit codes, seeding, reproducibility."""

import json
import os

import numpy as np
import pytest

from gnss_sentinel.cli import main
from gnss_sentinel.manifest import read_manifest_stages
from gnss_sentinel.signals import JamClass
from gnss_sentinel.tabular import synth_spoof_dataset, write_csv


@pytest.fixture()
def work(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("GNSS_SENTINEL_SEED", raising=False)
    return tmp_path


def write_config(path, **overrides):
    cfg = {
        "seed": 5,
        "out_dir": "run",
        "synth": {"signals_per_class": 3, "duration_s": 0.001},
        "tabular": {
            "n_per_class": 80,
            "cv_splits": 3,
            "kinds": ["gaussian_nb", "decision_tree"],
            "grids": {
                "gaussian_nb": [{"var_smoothing": 1e-9}],
                "decision_tree": [{"max_depth": 6}],
            },
        },
        "image": {"epochs": 1, "batch_size": 8},
    }
    for key, value in overrides.items():
        section = cfg.setdefault(key, {})
        if isinstance(value, dict):
            section.update(value)
        else:
            cfg[key] = value
    path.write_text(json.dumps(cfg))
    return path


def test_synth_writes_files_and_manifest(work):
    config = write_config(work / "cfg.json")
    assert main(["--config", str(config), "synth"]) == 0
    giq = sorted((work / "run" / "iq").rglob("*.giq"))
    meta = sorted((work / "run" / "iq").rglob("*.giq.meta"))
    assert len(giq) == 3 * len(JamClass)
    assert len(meta) == len(giq)
    class_dirs = {p.parent.name for p in giq}
    assert class_dirs == {c.label for c in JamClass}
    assert (work / "run" / "manifest-synth.json").exists()


def test_synth_rerun_bit_identical_across_threads(work):
    config = write_config(work / "cfg.json")
    assert main(["--config", str(config), "synth"]) == 0
    first = read_manifest_stages(work / "run" / "manifest-synth.json")
    assert main(["--config", str(config), "--out", "run2", "--threads", "4", "synth"]) == 0
    second = read_manifest_stages(work / "run2" / "manifest-synth.json")
    assert first == second


def test_synth_class_subset_and_invalid_name(work, capsys):
    config = write_config(work / "cfg.json", synth={"signals_per_class": 2, "duration_s": 0.001, "classes": ["NoJam", "DME"]})
    assert main(["--config", str(config), "synth"]) == 0
    dirs = {p.name for p in (work / "run" / "iq").iterdir() if p.is_dir()}
    assert dirs == {"NoJam", "DME"}
    bad = write_config(work / "bad.json", synth={"classes": ["NoJam", "Martian"]})
    assert main(["--config", str(bad), "--out", "run2", "synth"]) == 2
    err = capsys.readouterr().err
    assert "Martian" in err and "SingleChirp" in err  # names the valid set


def test_spectrogram_counts_and_header(work):
    config = write_config(work / "cfg.json", spectrogram={"image_size": 32})
    main(["--config", str(config), "synth"])
    assert main(["--config", str(config), "spectrogram"]) == 0
    pgm = sorted((work / "run" / "images").rglob("*.pgm"))
    assert len(pgm) == 3 * len(JamClass)
    head = pgm[0].read_bytes()[:20].split(b"\n")
    assert head[0] == b"P5"
    assert head[1] == b"32 32"
    assert head[2] == b"255"


def test_train_tabular_outputs(work):
    config = write_config(work / "cfg.json")
    assert main(["--config", str(config), "train-tabular"]) == 0
    out = work / "run"
    assert (out / "model.json").exists()
    reports = out / "reports"
    for name in ["confusion.csv", "metrics.csv", "summary.json", "accuracy_bars.svg", "confusion.svg", "roc.svg", "accuracy_summary.csv", "grid_log.txt"]:
        assert (reports / name).exists(), name
    summary = json.loads((reports / "summary.json").read_text())
    assert 0.0 <= summary["accuracy"] <= 1.0
    lines = (reports / "accuracy_summary.csv").read_text().strip().splitlines()
    assert lines[0] == "kind,validation_accuracy,test_accuracy"
    assert len(lines) == 3  # two kinds configured


def test_evaluate_round_trip_and_mismatch(work):
    config = write_config(work / "cfg.json")
    main(["--config", str(config), "train-tabular"])
    ds = synth_spoof_dataset(30, 0.5, seed=9)
    write_csv(work / "eval.csv", ds)
    assert main(["--config", str(config), "evaluate", "--model", "run/model.json", "--data", str(work / "eval.csv")]) == 0
    assert (work / "run" / "eval-report" / "summary.json").exists()
    # a directory is not a valid dataset for a classical model
    assert main(["--config", str(config), "evaluate", "--model", "run/model.json", "--data", str(work)]) == 2


def test_evaluate_missing_model_is_data_error(work):
    config = write_config(work / "cfg.json")
    code = main(["--config", str(config), "evaluate", "--model", "nope.json", "--data", "nope.csv"])
    assert code == 2


def test_train_image_and_reports(work):
    config = write_config(
        work / "cfg.json",
        synth={"signals_per_class": 8, "duration_s": 0.001},
        spectrogram={"image_size": 16},
        image={"epochs": 2, "batch_size": 8, "fractions": [0.5, 0.25, 0.25]},
    )
    assert main(["--config", str(config), "train-image"]) == 0
    out = work / "run"
    assert (out / "checkpoint.json").exists()
    history = (out / "history.csv").read_text().strip().splitlines()
    assert history[0] == "epoch,lr_last,train_loss,val_loss,val_acc"
    assert len(history) == 3  # header + one row per epoch
    assert (out / "reports" / "summary.json").exists()


def test_train_image_from_pgm_tree(work):
    config = write_config(
        work / "cfg.json",
        synth={"signals_per_class": 8, "duration_s": 0.001},
        spectrogram={"image_size": 16},
    )
    main(["--config", str(config), "synth"])
    main(["--config", str(config), "spectrogram"])
    config2 = write_config(
        work / "cfg2.json",
        synth={"signals_per_class": 8, "duration_s": 0.001},
        spectrogram={"image_size": 16},
        image={"source": "run/images", "epochs": 1, "batch_size": 8, "fractions": [0.5, 0.25, 0.25]},
    )
    assert main(["--config", str(config2), "--out", "run3", "train-image"]) == 0
    ckpt = json.loads((work / "run3" / "checkpoint.json").read_text())
    assert ckpt["payload"]["model"]["arch"]["input_hw"] == [16, 16]


def test_cnn_evaluate_on_tree(work):
    config = write_config(
        work / "cfg.json",
        synth={"signals_per_class": 8, "duration_s": 0.001},
        spectrogram={"image_size": 16},
        image={"epochs": 1, "batch_size": 8, "fractions": [0.5, 0.25, 0.25]},
    )
    main(["--config", str(config), "synth"])
    main(["--config", str(config), "spectrogram"])
    main(["--config", str(config), "train-image"])
    code = main(["--config", str(config), "evaluate", "--model", "run/checkpoint.json", "--data", "run/images"])
    assert code == 0
    # feeding a CSV to a CNN checkpoint is a data error
    ds = synth_spoof_dataset(10, 0.5, seed=2)
    write_csv(work / "x.csv", ds)
    assert main(["--config", str(config), "evaluate", "--model", "run/checkpoint.json", "--data", str(work / "x.csv")]) == 2


def test_grid_search_command(work):
    config = write_config(work / "cfg.json")
    assert main(["--config", str(config), "grid-search", "--kind", "decision_tree"]) == 0
    payload = json.loads((work / "run" / "gridsearch-decision_tree.json").read_text())
    assert payload["kind"] == "decision_tree"
    assert payload["candidates"]


def test_report_rerender(work):
    config = write_config(work / "cfg.json")
    main(["--config", str(config), "train-tabular"])
    svg = work / "run" / "reports" / "roc.svg"
    before = svg.read_text()
    svg.write_text("clobbered")
    assert main(["--config", str(config), "report", "--dir", "run/reports"]) == 0
    assert svg.read_text() != "clobbered"
    assert svg.read_text() == before


def test_env_seed_override(work, monkeypatch):
    config = write_config(work / "cfg.json")
    monkeypatch.setenv("GNSS_SENTINEL_SEED", "99")
    main(["--config", str(config), "synth"])
    env_run = read_manifest_stages(work / "run" / "manifest-synth.json")
    monkeypatch.delenv("GNSS_SENTINEL_SEED")
    main(["--config", str(config), "--out", "runB", "--seed", "99", "synth"])
    flag_run = read_manifest_stages(work / "runB" / "manifest-synth.json")
    assert env_run == flag_run
    main(["--config", str(config), "--out", "runC", "synth"])
    default_run = read_manifest_stages(work / "runC" / "manifest-synth.json")
    assert default_run != env_run
    # explicit flag beats the environment
    monkeypatch.setenv("GNSS_SENTINEL_SEED", "1234")
    main(["--config", str(config), "--out", "runD", "--seed", "99", "synth"])
    assert read_manifest_stages(work / "runD" / "manifest-synth.json") == env_run


def test_stage_seeds_are_independent(work):
    # The master seed fans out per stage; reconfiguring the synth stage must
    # not perturb the tabular stage's outputs.
    config_a = write_config(work / "a.json")
    config_b = write_config(work / "b.json", synth={"signals_per_class": 7, "duration_s": 0.002})
    main(["--config", str(config_a), "--out", "outA", "train-tabular"])
    main(["--config", str(config_b), "--out", "outB", "train-tabular"])
    a = read_manifest_stages(work / "outA" / "manifest-train-tabular.json")
    b = read_manifest_stages(work / "outB" / "manifest-train-tabular.json")
    assert a == b


def test_bad_config_is_usage_error(work):
    bad = work / "bad.json"
    bad.write_text("{not json")
    assert main(["--config", str(bad), "synth"]) == 1
    unknown = work / "unknown.json"
    unknown.write_text(json.dumps({"frobnicate": 1}))
    assert main(["--config", str(unknown), "synth"]) == 1


def test_bad_env_seed_is_usage_error(work, monkeypatch):
    config = write_config(work / "cfg.json")
    monkeypatch.setenv("GNSS_SENTINEL_SEED", "not-a-number")
    assert main(["--config", str(config), "synth"]) == 1


def test_unknown_subcommand_exits_one(work):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1
