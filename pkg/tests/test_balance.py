import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gnss_sentinel.balance import random_oversample, random_undersample, smote
from gnss_sentinel.errors import DataError
from gnss_sentinel.tabular import TabularDataset


def dataset_with_counts(counts, seed=0, d=13):
    rng = np.random.default_rng(seed)
    X = rng.normal(0, 1, (sum(counts), d))
    y = np.concatenate([np.full(c, i) for i, c in enumerate(counts)])
    return TabularDataset(X, y, tuple(f"f{i}" for i in range(d)))


def rows_as_set(X):
    return {tuple(row) for row in X}


def test_undersample_counts():
    ds = dataset_with_counts([100, 50, 20, 10])
    out = random_undersample(ds, seed=1)
    assert all(v == 10 for v in out.class_counts().values())


def test_undersample_balanced_input_keeps_rows():
    ds = dataset_with_counts([12, 12])
    out = random_undersample(ds, seed=2)
    assert sorted(map(tuple, out.X)) == sorted(map(tuple, ds.X))


def test_undersample_rows_are_subset():
    ds = dataset_with_counts([30, 7])
    out = random_undersample(ds, seed=3)
    assert rows_as_set(out.X) <= rows_as_set(ds.X)


def test_oversample_counts():
    ds = dataset_with_counts([100, 10])
    out = random_oversample(ds, seed=4)
    assert all(v == 100 for v in out.class_counts().values())


def test_oversample_rows_duplicate_originals_exactly():
    ds = dataset_with_counts([40, 6])
    out = random_oversample(ds, seed=5)
    assert rows_as_set(out.X) <= rows_as_set(ds.X)


def test_oversample_keeps_majority_untouched():
    ds = dataset_with_counts([25, 5])
    out = random_oversample(ds, seed=6)
    majority = out.X[out.y == 0]
    assert np.array_equal(majority, ds.X[ds.y == 0])


def test_smote_counts():
    ds = dataset_with_counts([50, 20])
    out = smote(ds, k=5, seed=7)
    assert all(v == 50 for v in out.class_counts().values())
    assert out.n == 100  # 30 synthetic rows appended


def test_smote_synthetic_points_on_segments():
    ds = dataset_with_counts([60, 25, 11])
    out, records = smote(ds, k=5, seed=8, return_log=True)
    synthetic = out.X[ds.n :]
    assert len(synthetic) == len(records)
    for point, rec in zip(synthetic, records):
        base = ds.X[rec.base_index]
        neighbor = ds.X[rec.neighbor_index]
        assert ds.y[rec.base_index] == rec.cls and ds.y[rec.neighbor_index] == rec.cls
        assert 0.0 <= rec.u <= 1.0
        expected = base + rec.u * (neighbor - base)
        assert np.max(np.abs(point - expected)) <= 1e-9
        # Collinearity: (p - x) x (nn - x) has zero norm.
        diff = point - base
        seg = neighbor - base
        cross_norm_sq = float(np.dot(diff, diff) * np.dot(seg, seg) - np.dot(diff, seg) ** 2)
        assert abs(cross_norm_sq) <= 1e-9


def test_smote_one_dimensional_interval():
    X = np.array([[0.0], [1.0], [5.0], [5.1], [5.2], [4.9]])
    y = np.array([0, 0, 1, 1, 1, 1])
    ds = TabularDataset(X, y, ("v",))
    out = smote(ds, k=1, seed=9)
    synthetic = out.X[len(X) :, 0]
    assert len(synthetic) == 2
    assert np.all((synthetic >= 0.0) & (synthetic <= 1.0))


def test_smote_rejects_small_class():
    ds = dataset_with_counts([30, 4])
    with pytest.raises(DataError, match="k"):
        smote(ds, k=5, seed=10)


def test_smote_neighbor_ties_break_to_lowest_index():
    # Three identical minority points: the nearest neighbor of each is the
    # lowest-indexed other point.
    X = np.vstack([np.zeros((3, 2)), np.ones((9, 2))])
    y = np.array([0] * 3 + [1] * 9)
    ds = TabularDataset(X, y, ("a", "b"))
    _, records = smote(ds, k=1, seed=11, return_log=True)
    for rec in records:
        expected_neighbor = 1 if rec.base_index == 0 else 0
        assert rec.neighbor_index == expected_neighbor


def test_balance_empty_dataset_rejected():
    ds = TabularDataset(np.zeros((0, 13)), np.zeros(0, dtype=int))
    for op in (random_undersample, random_oversample):
        with pytest.raises(DataError):
            op(ds, seed=0)


@settings(max_examples=20, deadline=None)
@given(
    counts=st.lists(st.integers(7, 30), min_size=2, max_size=4),
    seed=st.integers(0, 2**32),
)
def test_balancing_equalizes_counts(counts, seed):
    ds = dataset_with_counts(counts, seed=1, d=4)
    k_classes = len(counts)
    under = random_undersample(ds, seed)
    over = random_oversample(ds, seed)
    synth = smote(ds, k=min(counts) - 1, seed=seed)
    assert set(under.class_counts().values()) == {min(counts)}
    assert set(over.class_counts().values()) == {max(counts)}
    assert set(synth.class_counts().values()) == {max(counts)}
    assert under.n == k_classes * min(counts)
    assert over.n == synth.n == k_classes * max(counts)
    # Majority rows preserved verbatim by all three.
    majority = int(np.argmax([ds.class_counts()[i] for i in range(k_classes)]))
    original = ds.X[ds.y == majority]
    for out in (over, synth):
        assert np.array_equal(out.X[out.y == majority][: len(original)], original)


def test_determinism():
    ds = dataset_with_counts([40, 12, 9])
    a = smote(ds, k=4, seed=12)
    b = smote(ds, k=4, seed=12)
    assert np.array_equal(a.X, b.X)
    c = smote(ds, k=4, seed=13)
    assert not np.array_equal(c.X, a.X)
