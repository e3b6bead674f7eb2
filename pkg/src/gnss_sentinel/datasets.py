"""Benchmark dataset construction for the jamming image pipeline.

Every signal gets its own Philox stream derived from (master seed, class,
index): one draw of randomized jammer parameters plus the synthesis seed.
Images are quantized to 8-bit exactly as the PGM files are, so in-memory
sets match what the file pipeline produces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError
from .rng import derive_seed, make_rng
from .signals import (
    AmParams,
    ChirpParams,
    DmeParams,
    FmParams,
    IqSignal,
    JamClass,
    NbParams,
    SynthParams,
    synth_signal,
    write_iq,
)
from .spectrogram import StftConfig, stft, to_image, write_pgm


@dataclass(frozen=True)
class JammingSetConfig:
    signals_per_class: int = 600
    sample_rate_hz: float = 4_096_000.0
    duration_s: float = 0.002
    jsr_db_min: float = 0.0
    jsr_db_max: float = 10.0
    stft: StftConfig = field(default_factory=StftConfig)
    image_size: int = 64

    def validate(self) -> None:
        if self.signals_per_class < 1:
            raise DataError("signals_per_class must be >= 1")
        if self.jsr_db_max < self.jsr_db_min:
            raise DataError("jsr_db_max must be >= jsr_db_min")
        n = int(round(self.duration_s * self.sample_rate_hz))
        if n < self.stft.n_fft:
            raise DataError(f"{n} samples is shorter than n_fft={self.stft.n_fft}")


def random_synth_params(cfg: JammingSetConfig, rng: np.random.Generator) -> SynthParams:
    """Draw per-signal jammer parameters from the benchmark's ranges."""
    fs = cfg.sample_rate_hz
    jsr = float(rng.uniform(cfg.jsr_db_min, cfg.jsr_db_max))
    am = AmParams(
        carrier_offset_hz=float(rng.uniform(-0.3, 0.3) * fs),
        mod_index=float(rng.uniform(0.3, 1.0)),
        mod_rate_hz=float(rng.uniform(fs / 2048, fs / 256)),
    )
    f_lo = float(rng.uniform(-0.45, -0.05) * fs)
    f_hi = float(rng.uniform(0.05, 0.45) * fs)
    if rng.uniform() < 0.5:
        f_lo, f_hi = f_hi, f_lo
    chirp = ChirpParams(
        f_start_hz=f_lo,
        f_end_hz=f_hi,
        sweep_period_s=float(rng.uniform(0.2, 1.0) * cfg.duration_s),
    )
    dev = float(rng.uniform(0.02, 0.10) * fs)
    max_offset = 0.45 * fs - dev
    fm = FmParams(
        carrier_offset_hz=float(rng.uniform(-max_offset, max_offset)),
        freq_dev_hz=dev,
        mod_rate_hz=float(rng.uniform(fs / 8192, fs / 1024)),
    )
    bw = float(rng.uniform(fs / 12, fs / 5))
    max_center = 0.5 * fs - bw / 2
    nb = NbParams(center_hz=float(rng.uniform(-max_center, max_center)), bandwidth_hz=bw)
    dme = DmeParams(
        pulse_pair_spacing_s=12e-6,
        pulse_width_s=3.5e-6,
        pair_rate_hz=float(rng.uniform(1500.0, 5000.0)),
    )
    return SynthParams(cfg.duration_s, fs, jsr, am, chirp, fm, nb, dme)


def _signal_for(cfg: JammingSetConfig, jam_class: JamClass, index: int, master_seed: int) -> tuple[IqSignal, SynthParams]:
    sig_seed = derive_seed(master_seed, "signal", int(jam_class), index)
    params = random_synth_params(cfg, make_rng(sig_seed, "params"))
    return synth_signal(jam_class, params, sig_seed), params


def signal_to_pixels(sig: IqSignal, stft_config: StftConfig, image_size: int) -> np.ndarray:
    """8-bit spectrogram image pixels for one signal."""
    image = to_image(stft(sig, stft_config), image_size, image_size)
    return image.pixels


def build_jamming_images(cfg: JammingSetConfig, master_seed: int) -> tuple[np.ndarray, np.ndarray]:
    """(n, size, size) uint8 pixels and (n,) class labels, class-major order."""
    cfg.validate()
    n_total = cfg.signals_per_class * len(JamClass)
    pixels = np.empty((n_total, cfg.image_size, cfg.image_size), dtype=np.uint8)
    labels = np.empty(n_total, dtype=np.int64)
    pos = 0
    for jam_class in JamClass:
        for index in range(cfg.signals_per_class):
            sig, _ = _signal_for(cfg, jam_class, index, master_seed)
            pixels[pos] = signal_to_pixels(sig, cfg.stft, cfg.image_size)
            labels[pos] = int(jam_class)
            pos += 1
    return pixels, labels


def to_model_input(pixels: np.ndarray) -> np.ndarray:
    """uint8 images -> float32 (n, 1, h, w) scaled to [-1, 1]."""
    x = pixels.astype(np.float32) / 255.0
    x = (x - 0.5) / 0.5
    return x[:, None, :, :]


def split_by_class(labels: np.ndarray, fractions: tuple[float, float, float], seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stratified train/val/test index split; fractions must sum to 1."""
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise DataError(f"split fractions must sum to 1, got {fractions}")
    train_idx, val_idx, test_idx = [], [], []
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        order = make_rng(seed, "three-way-split", int(cls)).permutation(len(members))
        members = members[order]
        n_train = int(np.floor(fractions[0] * len(members) + 0.5))
        n_val = int(np.floor(fractions[1] * len(members) + 0.5))
        train_idx.append(members[:n_train])
        val_idx.append(members[n_train : n_train + n_val])
        test_idx.append(members[n_train + n_val :])
    return np.concatenate(train_idx), np.concatenate(val_idx), np.concatenate(test_idx)


# ---------------------------------------------------------------------------
# File-tree variants used by the CLI commands
# ---------------------------------------------------------------------------


def synth_iq_tree(
    cfg: JammingSetConfig,
    master_seed: int,
    out_dir: str | Path,
    classes: list[JamClass] | None = None,
) -> list[Path]:
    """One directory per class of GIQ1 files plus sidecars."""
    cfg.validate()
    out_dir = Path(out_dir)
    written: list[Path] = []
    for jam_class in classes if classes is not None else list(JamClass):
        class_dir = out_dir / jam_class.label
        class_dir.mkdir(parents=True, exist_ok=True)
        for index in range(cfg.signals_per_class):
            sig, params = _signal_for(cfg, jam_class, index, master_seed)
            path = class_dir / f"{jam_class.label.lower()}_{index:04d}.giq"
            write_iq(path, sig, jsr_db=params.jsr_db)
            written.append(path)
    return written


def spectrogram_tree(
    in_dir: str | Path, stft_config: StftConfig, image_size: int, out_dir: str | Path
) -> list[Path]:
    """Convert a GIQ1 tree to a PGM tree with the same per-class layout."""
    from .signals import read_iq

    in_dir = Path(in_dir)
    out_dir = Path(out_dir)
    if not in_dir.is_dir():
        raise DataError(f"{in_dir}: not a directory")
    written: list[Path] = []
    for class_dir in sorted(p for p in in_dir.iterdir() if p.is_dir()):
        target = out_dir / class_dir.name
        target.mkdir(parents=True, exist_ok=True)
        for iq_path in sorted(class_dir.glob("*.giq")):
            sig = read_iq(iq_path)
            image = to_image(stft(sig, stft_config), image_size, image_size)
            written.append(write_pgm(target / (iq_path.stem + ".pgm"), image))
    if not written:
        raise DataError(f"{in_dir}: no .giq files found")
    return written


def load_pgm_tree(root: str | Path) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Read a per-class PGM tree back into (pixels, labels, class names)."""
    from .spectrogram import read_pgm

    root = Path(root)
    if not root.is_dir():
        raise DataError(f"{root}: not a directory")
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not class_dirs:
        raise DataError(f"{root}: no class directories")
    names: list[str] = []
    pixel_list, labels = [], []
    for code, class_dir in enumerate(class_dirs):
        names.append(class_dir.name)
        for pgm_path in sorted(class_dir.glob("*.pgm")):
            image = read_pgm(pgm_path)
            pixel_list.append(image.pixels)
            labels.append(code)
    if not pixel_list:
        raise DataError(f"{root}: no .pgm files found")
    shapes = {p.shape for p in pixel_list}
    if len(shapes) > 1:
        raise DataError(f"{root}: inconsistent image sizes {sorted(shapes)}")
    return np.stack(pixel_list), np.array(labels, dtype=np.int64), names
