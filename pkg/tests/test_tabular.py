import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gnss_sentinel.errors import DataError
from gnss_sentinel.tabular import (
    FEATURE_NAMES,
    SpoofClass,
    TabularDataset,
    fit_standardizer,
    load_csv,
    stratified_split,
    synth_spoof_dataset,
    write_csv,
)


def small_csv(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


HEADER = ",".join(FEATURE_NAMES) + ",class\n"


def row(values, label):
    return ",".join(str(v) for v in values) + f",{label}\n"


def test_load_csv_two_rows(tmp_path):
    text = HEADER + row(range(13), 0) + row(range(13, 26), "simplistic")
    ds = load_csv(small_csv(tmp_path, text))
    assert ds.n == 2
    assert ds.y.tolist() == [0, 1]
    assert ds.X[0, 0] == 0.0 and ds.X[1, 12] == 25.0


def test_load_csv_missing_column(tmp_path):
    header = ",".join(n for n in FEATURE_NAMES if n != "CN0") + ",class\n"
    with pytest.raises(DataError, match="CN0"):
        load_csv(small_csv(tmp_path, header + "1,2,3,4,5,6,7,8,9,10,11,12,0\n"))


def test_load_csv_unknown_label(tmp_path):
    with pytest.raises(DataError, match="label"):
        load_csv(small_csv(tmp_path, HEADER + row(range(13), "martian")))


def test_load_csv_empty_file(tmp_path):
    with pytest.raises(DataError):
        load_csv(small_csv(tmp_path, ""))


def test_load_csv_drops_nonfinite_rows(tmp_path, caplog):
    text = HEADER + row(range(13), 0) + row(["nan"] + list(range(12)), 1) + row(range(13), 2)
    with caplog.at_level("WARNING"):
        ds = load_csv(small_csv(tmp_path, text))
    assert ds.n == 2
    assert any("dropped 1 rows" in message for message in caplog.messages)


def test_load_csv_ignores_extra_columns(tmp_path):
    header = "junk," + HEADER
    text = header + "9," + row(range(13), "authentic")
    ds = load_csv(small_csv(tmp_path, text))
    assert ds.n == 1
    assert ds.X[0, 0] == 0.0


def test_csv_round_trip(tmp_path):
    ds = synth_spoof_dataset(25, 0.3, seed=1)
    path = write_csv(tmp_path / "out.csv", ds)
    back = load_csv(path)
    assert np.max(np.abs(back.X - ds.X)) < 1e-9
    assert np.array_equal(back.y, ds.y)


def test_stratified_split_balanced_counts():
    ds = synth_spoof_dataset(100, 0.5, seed=2)
    train, test = stratified_split(ds, 0.7, seed=3)
    assert all(v == 70 for v in train.class_counts().values())
    assert all(v == 30 for v in test.class_counts().values())


def test_stratified_split_rounding_rule():
    X = np.zeros((13, 13))
    y = np.array([0] * 10 + [1] * 3)
    ds = TabularDataset(X, y)
    train, test = stratified_split(ds, 0.7, seed=4)
    assert train.class_counts() == {0: 7, 1: 2}
    assert test.class_counts() == {0: 3, 1: 1}


def test_stratified_split_deterministic():
    ds = synth_spoof_dataset(40, 0.5, seed=5)
    a_train, a_test = stratified_split(ds, 0.7, seed=6)
    b_train, b_test = stratified_split(ds, 0.7, seed=6)
    assert np.array_equal(a_train.X, b_train.X)
    assert np.array_equal(a_test.X, b_test.X)


def test_stratified_split_rejects_tiny_class():
    ds = TabularDataset(np.zeros((3, 13)), np.array([0, 0, 1]))
    with pytest.raises(DataError):
        stratified_split(ds, 0.5, seed=0)


@settings(max_examples=25, deadline=None)
@given(
    counts=st.lists(st.integers(2, 40), min_size=2, max_size=5),
    fraction=st.floats(0.1, 0.9),
    seed=st.integers(0, 2**32),
)
def test_stratified_split_is_partition(counts, fraction, seed):
    y = np.concatenate([np.full(c, i) for i, c in enumerate(counts)])
    ds = TabularDataset(np.arange(len(y) * 13, dtype=float).reshape(len(y), 13), y)
    train, test = stratified_split(ds, fraction, seed)
    combined = np.vstack([train.X, test.X])
    assert combined.shape[0] == ds.n
    # Row identity: every original row appears exactly once across the split.
    assert sorted(map(tuple, combined)) == sorted(map(tuple, ds.X))


def test_standardizer_hand_computed():
    ds = TabularDataset(np.tile(np.array([[1.0], [2.0], [3.0]]), (1, 13)), np.array([0, 0, 1]))
    std = fit_standardizer(ds)
    out = std.apply(ds)
    expected = np.array([-1.224744871391589, 0.0, 1.224744871391589])
    assert np.allclose(out.X[:, 0], expected, atol=1e-12)


def test_standardizer_constant_column():
    X = np.ones((4, 13)) * 5.0
    ds = TabularDataset(X, np.array([0, 0, 1, 1]))
    std = fit_standardizer(ds)
    assert np.all(std.std == 1.0)
    assert np.allclose(std.apply(ds).X, 0.0)


def test_standardizer_train_mean_zero_and_invertible():
    ds = synth_spoof_dataset(50, 0.4, seed=7)
    std = fit_standardizer(ds)
    out = std.apply(ds)
    assert np.max(np.abs(out.X.mean(axis=0))) < 1e-9
    assert np.max(np.abs(out.X.var(axis=0) - 1.0)) < 1e-9
    back = std.invert(out)
    assert np.max(np.abs(back.X - ds.X)) < 1e-9


def nearest_mean_accuracy(ds):
    means = np.stack([ds.X[ds.y == c].mean(axis=0) for c in sorted(set(ds.y.tolist()))])
    d = ((ds.X[:, None, :] - means[None, :, :]) ** 2).sum(axis=2)
    return float(np.mean(np.argmin(d, axis=1) == ds.y))


def test_synth_spoof_easy_is_nearest_mean_separable():
    ds = synth_spoof_dataset(500, 0.0, seed=8)
    assert nearest_mean_accuracy(ds) >= 0.99


def test_synth_spoof_hard_is_near_chance():
    ds = synth_spoof_dataset(500, 1.0, seed=9)
    assert nearest_mean_accuracy(ds) <= 0.45


def test_synth_spoof_counts_and_determinism():
    ds = synth_spoof_dataset(17, 0.5, seed=10)
    assert all(v == 17 for v in ds.class_counts().values())
    again = synth_spoof_dataset(17, 0.5, seed=10)
    assert np.array_equal(ds.X, again.X)


def test_synth_spoof_rejects_bad_args():
    with pytest.raises(DataError):
        synth_spoof_dataset(0, 0.5, seed=0)
    with pytest.raises(DataError):
        synth_spoof_dataset(5, 1.5, seed=0)


def test_spoof_class_parsing():
    assert SpoofClass.from_text("Sophisticated") == SpoofClass.SOPHISTICATED
    assert SpoofClass.from_text("2") == SpoofClass.INTERMEDIATE
    with pytest.raises(DataError):
        SpoofClass.from_text("5")
