"""Tabular GPS-spoofing data: 13 receiver observables, four attack grades.

Feature columns (fixed order): PRN, DO, PD, RX, TOW, CP, EC, LC, PC, PIP,
PQP, TCD, CN0. Class codes: 0 authentic, 1 simplistic, 2 intermediate,
3 sophisticated. The synthetic generator mirrors the attack semantics:
simplistic attacks shift Doppler (DO) and carrier-to-noise (CN0) hard,
intermediate attacks nudge carrier phase (CP) and pseudo-range (PD), and
sophisticated attacks spread a weak shift plus correlated structure across
many observables.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path

import numpy as np

from .errors import DataError
from .rng import make_rng

log = logging.getLogger(__name__)

FEATURE_NAMES = ("PRN", "DO", "PD", "RX", "TOW", "CP", "EC", "LC", "PC", "PIP", "PQP", "TCD", "CN0")
N_FEATURES = len(FEATURE_NAMES)
LABEL_COLUMN = "class"


class SpoofClass(IntEnum):
    AUTHENTIC = 0
    SIMPLISTIC = 1
    INTERMEDIATE = 2
    SOPHISTICATED = 3

    @classmethod
    def from_text(cls, text: str) -> "SpoofClass":
        key = text.strip().lower()
        for member in cls:
            if key == member.name.lower() or key == str(member.value):
                return member
        raise DataError(f"unknown class label {text!r}")


@dataclass
class TabularDataset:
    X: np.ndarray  # (n, 13) float64
    y: np.ndarray  # (n,) int64 class codes
    schema: tuple[str, ...] = FEATURE_NAMES

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.ndim != 2 or self.X.shape[1] != len(self.schema):
            raise DataError(f"feature matrix must be n x {len(self.schema)}, got {self.X.shape}")
        if len(self.X) != len(self.y):
            raise DataError(f"row mismatch: {len(self.X)} features vs {len(self.y)} labels")

    @property
    def n(self) -> int:
        return len(self.y)

    def class_counts(self) -> dict[int, int]:
        values, counts = np.unique(self.y, return_counts=True)
        return dict(zip(values.tolist(), counts.tolist()))

    def subset(self, idx: np.ndarray) -> "TabularDataset":
        return TabularDataset(self.X[idx], self.y[idx], self.schema)


def load_csv(path: str | Path) -> TabularDataset:
    """Read a header-ed CSV, matching columns to the schema by name.

    Extra columns are ignored; rows containing non-finite or unparseable
    feature values are dropped and reported by row index.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        col_index: dict[str, int] = {}
        for name in FEATURE_NAMES:
            if name not in header:
                raise DataError(f"{path}: missing schema column {name!r}")
            col_index[name] = header.index(name)
        if LABEL_COLUMN not in header:
            raise DataError(f"{path}: missing label column {LABEL_COLUMN!r}")
        label_idx = header.index(LABEL_COLUMN)

        rows: list[list[float]] = []
        labels: list[int] = []
        dropped: list[int] = []
        for row_num, row in enumerate(reader):
            if not row:
                continue
            values = []
            ok = True
            for name in FEATURE_NAMES:
                try:
                    v = float(row[col_index[name]])
                except (ValueError, IndexError):
                    ok = False
                    break
                if not np.isfinite(v):
                    ok = False
                    break
                values.append(v)
            if not ok:
                dropped.append(row_num)
                continue
            labels.append(int(SpoofClass.from_text(row[label_idx])))
            rows.append(values)
    if dropped:
        log.warning("%s: dropped %d rows with non-finite values (rows %s)", path, len(dropped), dropped[:20])
    if not rows:
        raise DataError(f"{path}: no valid data rows")
    return TabularDataset(np.array(rows), np.array(labels))


def write_csv(path: str | Path, ds: TabularDataset) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(ds.schema) + [LABEL_COLUMN])
        for row, label in zip(ds.X, ds.y):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])
    return path


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def stratified_split(ds: TabularDataset, train_fraction: float, seed: int) -> tuple[TabularDataset, TabularDataset]:
    """Per-class shuffle and split; train gets round(fraction * count) rows."""
    if not (0.0 < train_fraction < 1.0):
        raise DataError(f"train_fraction must be in (0, 1), got {train_fraction}")
    train_idx: list[np.ndarray] = []
    test_idx: list[np.ndarray] = []
    for cls in np.unique(ds.y):
        members = np.flatnonzero(ds.y == cls)
        if len(members) < 2:
            raise DataError(f"class {cls} has {len(members)} samples; need at least 2 to split")
        order = make_rng(seed, "split", int(cls)).permutation(len(members))
        members = members[order]
        n_train = _round_half_up(train_fraction * len(members))
        train_idx.append(members[:n_train])
        test_idx.append(members[n_train:])
    return ds.subset(np.concatenate(train_idx)), ds.subset(np.concatenate(test_idx))


@dataclass
class Standardizer:
    mean: np.ndarray
    std: np.ndarray  # population std; zero-variance columns forced to 1

    @classmethod
    def fit(cls, ds: TabularDataset) -> "Standardizer":
        if ds.n < 1:
            raise DataError("cannot standardize an empty dataset")
        mean = ds.X.mean(axis=0)
        std = ds.X.std(axis=0)  # population (ddof=0)
        std = np.where(std > 0, std, 1.0)
        return cls(mean, std)

    def apply(self, ds: TabularDataset) -> TabularDataset:
        return TabularDataset((ds.X - self.mean) / self.std, ds.y, ds.schema)

    def invert(self, ds: TabularDataset) -> TabularDataset:
        return TabularDataset(ds.X * self.std + self.mean, ds.y, ds.schema)

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.std


def fit_standardizer(ds: TabularDataset) -> Standardizer:
    return Standardizer.fit(ds)


# Feature indices used by the synthetic attack classes.
_IDX_DO = FEATURE_NAMES.index("DO")
_IDX_CN0 = FEATURE_NAMES.index("CN0")
_IDX_CP = FEATURE_NAMES.index("CP")
_IDX_PD = FEATURE_NAMES.index("PD")
_IDX_SOPH = tuple(FEATURE_NAMES.index(n) for n in ("PD", "RX", "TOW", "CP", "EC", "PC", "PIP", "TCD"))


def synth_spoof_dataset(n_per_class: int, difficulty: float, seed: int) -> TabularDataset:
    """Gaussian-mixture stand-in for the real spoofing captures.

    Class separation scales with (1 - difficulty): at 0 the classes are
    nearest-mean separable, at 1 they nearly coincide.
    """
    if n_per_class < 1:
        raise DataError(f"n_per_class must be >= 1, got {n_per_class}")
    if not (0.0 <= difficulty <= 1.0):
        raise DataError(f"difficulty must be in [0, 1], got {difficulty}")
    sep = 1.0 - difficulty
    blocks: list[np.ndarray] = []
    labels: list[np.ndarray] = []
    for cls in SpoofClass:
        rng = make_rng(seed, "spoof", int(cls))
        X = rng.normal(0.0, 1.0, (n_per_class, N_FEATURES))
        if cls == SpoofClass.SIMPLISTIC:
            # Unsynchronized counterfeit: hot Doppler and inflated signal strength.
            X[:, _IDX_DO] += 10.0 * sep
            X[:, _IDX_CN0] += 10.0 * sep
        elif cls == SpoofClass.INTERMEDIATE:
            X[:, _IDX_CP] += 6.0 * sep
            X[:, _IDX_PD] += 6.0 * sep
        elif cls == SpoofClass.SOPHISTICATED:
            # Weak per-feature shift plus a shared latent component; the
            # latent alternates sign across features so the correlation
            # structure lies orthogonal to the mean shift.
            latent = rng.normal(0.0, 1.0, n_per_class)
            for pos, idx in enumerate(_IDX_SOPH):
                sign = 1.0 if pos % 2 == 0 else -1.0
                X[:, idx] += 2.5 * sep + sign * 0.8 * sep * latent
        blocks.append(X)
        labels.append(np.full(n_per_class, int(cls), dtype=np.int64))
    return TabularDataset(np.vstack(blocks), np.concatenate(labels))
