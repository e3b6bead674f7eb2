"""Class rebalancing: random undersampling, random oversampling, and
interpolation-based synthetic oversampling of minorities.

All three preserve the majority-class rows verbatim and equalize class
counts; determinism comes from per-class Philox streams.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .rng import make_rng
from .tabular import TabularDataset


def _require_nonempty(ds: TabularDataset) -> dict[int, int]:
    counts = ds.class_counts()
    if not counts:
        raise DataError("cannot balance an empty dataset")
    return counts


def random_undersample(ds: TabularDataset, seed: int) -> TabularDataset:
    """Downsample every class without replacement to the minority count."""
    counts = _require_nonempty(ds)
    target = min(counts.values())
    kept: list[np.ndarray] = []
    for cls in sorted(counts):
        members = np.flatnonzero(ds.y == cls)
        order = make_rng(seed, "under", cls).permutation(len(members))
        kept.append(members[order[:target]])
    return ds.subset(np.concatenate(kept))


def random_oversample(ds: TabularDataset, seed: int) -> TabularDataset:
    """Upsample every class with replacement to the majority count.

    Added rows are exact duplicates of existing rows.
    """
    counts = _require_nonempty(ds)
    target = max(counts.values())
    pieces: list[np.ndarray] = []
    for cls in sorted(counts):
        members = np.flatnonzero(ds.y == cls)
        pieces.append(members)
        deficit = target - len(members)
        if deficit > 0:
            extra = make_rng(seed, "over", cls).integers(0, len(members), deficit)
            pieces.append(members[extra])
    return ds.subset(np.concatenate(pieces))


@dataclass(frozen=True)
class SmoteRecord:
    """Provenance of one synthetic row: base and neighbor rows plus the
    interpolation coefficient, for independent re-derivation."""

    cls: int
    base_index: int  # row index into the input dataset
    neighbor_index: int
    u: float


def _k_nearest_same_class(X: np.ndarray, i: int, k: int) -> np.ndarray:
    d = np.sum((X - X[i]) ** 2, axis=1)
    d[i] = np.inf
    # Ties broken by lowest row index: argsort is stable on the (d, index) order.
    order = np.argsort(d, kind="stable")
    return order[:k]


def smote(
    ds: TabularDataset, k: int = 5, seed: int = 0, return_log: bool = False
) -> TabularDataset | tuple[TabularDataset, list[SmoteRecord]]:
    """Raise every minority class to the majority count by interpolating
    between each sampled point and one of its k nearest same-class neighbors.
    """
    counts = _require_nonempty(ds)
    target = max(counts.values())
    new_rows: list[np.ndarray] = []
    new_labels: list[int] = []
    records: list[SmoteRecord] = []
    for cls in sorted(counts):
        deficit = target - counts[cls]
        if deficit == 0:
            continue
        members = np.flatnonzero(ds.y == cls)
        if len(members) <= k:
            raise DataError(
                f"class {cls} has {len(members)} samples but k={k}; use k < class count"
            )
        Xc = ds.X[members]
        neighbors = np.vstack([_k_nearest_same_class(Xc, i, k) for i in range(len(members))])
        rng = make_rng(seed, "smote", cls)
        base_choice = rng.integers(0, len(members), deficit)
        nn_choice = rng.integers(0, k, deficit)
        u = rng.uniform(0.0, 1.0, deficit)
        for b, nn, coeff in zip(base_choice, nn_choice, u):
            j = neighbors[b, nn]
            point = Xc[b] + coeff * (Xc[j] - Xc[b])
            new_rows.append(point)
            new_labels.append(cls)
            records.append(SmoteRecord(cls, int(members[b]), int(members[j]), float(coeff)))
    if new_rows:
        X = np.vstack([ds.X, np.array(new_rows)])
        y = np.concatenate([ds.y, np.array(new_labels, dtype=np.int64)])
        out = TabularDataset(X, y, ds.schema)
    else:
        out = TabularDataset(ds.X.copy(), ds.y.copy(), ds.schema)
    if return_log:
        return out, records
    return out
