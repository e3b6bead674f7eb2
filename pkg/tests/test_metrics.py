"""Metric oracles: brute-force counting, O(n^2) concordance AUC,
permutation invariance."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gnss_sentinel.classical import ClassifierKind, TreeParams
from gnss_sentinel.errors import DataError
from gnss_sentinel.metrics import (
    confusion,
    grid_search,
    metrics,
    read_confusion_csv,
    roc_auc_ovr,
    stratified_shuffle_splits,
    write_confusion_csv,
)
from gnss_sentinel.tabular import TabularDataset


def test_confusion_perfect_prediction():
    y = np.array([0, 1, 2, 1, 0])
    cm = confusion(y, y, 3)
    assert np.array_equal(cm.counts, np.diag([2, 2, 1]))
    assert cm.accuracy == 1.0


def test_confusion_hand_count():
    cm = confusion([0, 0, 1], [0, 1, 1], 2)
    assert cm.counts.tolist() == [[1, 1], [0, 1]]


def test_confusion_matches_double_loop():
    rng = np.random.default_rng(0)
    y_true = rng.integers(0, 5, 300)
    y_pred = rng.integers(0, 5, 300)
    cm = confusion(y_true, y_pred, 5)
    brute = np.zeros((5, 5), dtype=int)
    for t, p in zip(y_true, y_pred):
        brute[t, p] += 1
    assert np.array_equal(cm.counts, brute)


def test_confusion_rejects_out_of_range():
    with pytest.raises(DataError):
        confusion([0, 3], [0, 1], 3)


def test_metrics_perfect():
    rep = metrics(confusion([0, 1, 2], [0, 1, 2], 3))
    assert rep.accuracy == 1.0
    assert np.all(rep.precision == 1.0) and np.all(rep.recall == 1.0) and np.all(rep.f1 == 1.0)


def test_metrics_hand_computed():
    rep = metrics(confusion([0, 0, 1], [0, 1, 1], 2))
    assert np.allclose(rep.precision, [1.0, 0.5])
    assert np.allclose(rep.recall, [0.5, 1.0])
    assert np.allclose(rep.f1, [2 / 3, 2 / 3])
    assert rep.accuracy == pytest.approx(2 / 3)


def test_metrics_zero_division_convention(caplog):
    # Class 1 never predicted and absent: precision/recall/f1 all 0.
    with caplog.at_level("WARNING"):
        rep = metrics(confusion([0, 0], [0, 0], 2))
    assert rep.precision[1] == 0.0 and rep.recall[1] == 0.0 and rep.f1[1] == 0.0


def test_metrics_invariant_under_class_relabeling():
    rng = np.random.default_rng(1)
    y_true = rng.integers(0, 4, 200)
    y_pred = rng.integers(0, 4, 200)
    rep = metrics(confusion(y_true, y_pred, 4))
    perm = np.array([2, 0, 3, 1])  # old class c becomes perm[c]
    rep_p = metrics(confusion(perm[y_true], perm[y_pred], 4))
    for c in range(4):
        assert rep.precision[c] == pytest.approx(rep_p.precision[perm[c]], abs=1e-12)
        assert rep.recall[c] == pytest.approx(rep_p.recall[perm[c]], abs=1e-12)
        assert rep.f1[c] == pytest.approx(rep_p.f1[perm[c]], abs=1e-12)
    assert rep.accuracy == pytest.approx(rep_p.accuracy)
    assert rep.macro_f1 == pytest.approx(rep_p.macro_f1)


def concordance_auc(positive, scores):
    pos = scores[positive]
    neg = scores[~positive]
    wins = sum((pos[:, None] > neg[None, :]).sum() for _ in (0,))
    ties = (pos[:, None] == neg[None, :]).sum()
    return (wins + 0.5 * ties) / (len(pos) * len(neg))


def test_auc_perfect_separation():
    y = np.array([0, 0, 1, 1])
    proba = np.array([[0.9, 0.1], [0.8, 0.2], [0.1, 0.9], [0.2, 0.8]])
    roc = roc_auc_ovr(y, proba)
    assert roc.curves[0].auc == 1.0
    assert roc.curves[1].auc == 1.0
    for curve in roc.curves.values():
        assert curve.fpr[0] == 0.0 and curve.tpr[0] == 0.0
        assert curve.fpr[-1] == 1.0 and curve.tpr[-1] == 1.0
        assert np.all(np.diff(curve.fpr) >= 0) and np.all(np.diff(curve.tpr) >= 0)


def test_auc_all_scores_tied():
    y = np.array([0, 0, 1, 1, 1])
    proba = np.full((5, 2), 0.5)
    roc = roc_auc_ovr(y, proba)
    assert roc.curves[0].auc == pytest.approx(0.5)
    assert roc.curves[1].auc == pytest.approx(0.5)


def test_trapezoid_equals_concordance_on_random_instances():
    rng = np.random.default_rng(2)
    for trial in range(100):
        n = int(rng.integers(10, 60))
        k = int(rng.integers(2, 5))
        y = rng.integers(0, k, n)
        if len(np.unique(y)) < 2:
            continue
        scores = np.round(rng.uniform(0, 1, (n, k)), 2)  # ties likely
        proba = scores / scores.sum(axis=1, keepdims=True)
        roc = roc_auc_ovr(y, proba)
        for c, curve in roc.curves.items():
            oracle = concordance_auc(y == c, proba[:, c])
            assert abs(curve.auc - oracle) < 1e-9


def test_auc_invariant_under_monotone_transform():
    rng = np.random.default_rng(3)
    y = rng.integers(0, 3, 120)
    proba = rng.dirichlet(np.ones(3), 120)
    base = roc_auc_ovr(y, proba)
    warped = np.exp(5 * proba)  # strictly monotone, not row-stochastic
    after = roc_auc_ovr(y, warped / warped.sum(axis=1, keepdims=True) * 0 + warped)
    for c in base.curves:
        assert base.curves[c].auc == pytest.approx(after.curves[c].auc, abs=1e-12)


def test_auc_absent_class_excluded():
    y = np.array([0, 0, 1, 1])
    proba = np.random.default_rng(4).dirichlet(np.ones(3), 4)
    roc = roc_auc_ovr(y, proba)
    assert roc.absent_classes == [2]
    assert set(roc.curves) == {0, 1}
    assert roc.macro_auc == pytest.approx(np.mean([roc.curves[0].auc, roc.curves[1].auc]))


def test_stratified_shuffle_split_counts():
    y = np.concatenate([np.zeros(30, dtype=int), np.ones(70, dtype=int)])
    splits = stratified_shuffle_splits(y, 4, 0.3, seed=5)
    for train_idx, test_idx in splits:
        assert np.sum(y[test_idx] == 0) == 9
        assert np.sum(y[test_idx] == 1) == 21
        assert len(np.intersect1d(train_idx, test_idx)) == 0
        assert len(train_idx) + len(test_idx) == 100


def test_stratified_shuffle_splits_are_distinct():
    y = np.concatenate([np.zeros(40, dtype=int), np.ones(40, dtype=int)])
    splits = stratified_shuffle_splits(y, 3, 0.25, seed=6)
    test_sets = [frozenset(test.tolist()) for _, test in splits]
    assert len(set(test_sets)) == 3


def test_stratified_shuffle_split_rejects_small_class():
    with pytest.raises(DataError):
        stratified_shuffle_splits(np.array([0, 0, 1]), 2, 0.5, seed=0)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31), test_fraction=st.floats(0.15, 0.6))
def test_split_partition_property(seed, test_fraction):
    y = np.concatenate([np.full(13, 0), np.full(29, 1), np.full(7, 2)])
    for train_idx, test_idx in stratified_shuffle_splits(y, 2, test_fraction, seed):
        union = np.sort(np.concatenate([train_idx, test_idx]))
        assert np.array_equal(union, np.arange(len(y)))


def three_region_dataset():
    # x < 1 -> class 0; 1 <= x < 2 -> class 1; x >= 2 -> class 0.
    # A depth-1 tree cannot exceed 2/3 accuracy; depth 3 separates fully.
    x = np.concatenate([np.linspace(0, 0.9, 30), np.linspace(1.1, 1.9, 30), np.linspace(2.1, 3.0, 30)])
    y = np.array([0] * 30 + [1] * 30 + [0] * 30)
    return TabularDataset(x[:, None], y, ("x",))


def test_grid_search_single_candidate():
    ds = three_region_dataset()
    result = grid_search(ClassifierKind.DECISION_TREE, [TreeParams(max_depth=3)], ds, 3, 0.3, seed=7)
    assert result.best_index == 0


def test_grid_search_prefers_sufficient_depth():
    ds = three_region_dataset()
    grid = [TreeParams(max_depth=1), TreeParams(max_depth=3)]
    result = grid_search(ClassifierKind.DECISION_TREE, grid, ds, 4, 0.3, seed=8)
    assert result.best_index == 1
    shallow = result.candidates[0]
    assert shallow.mean_accuracy <= 2 / 3 + 1e-9


def test_grid_search_order_only_affects_ties():
    ds = three_region_dataset()
    grid = [TreeParams(max_depth=1), TreeParams(max_depth=3), TreeParams(max_depth=5)]
    fwd = grid_search(ClassifierKind.DECISION_TREE, grid, ds, 3, 0.3, seed=9)
    rev = grid_search(ClassifierKind.DECISION_TREE, grid[::-1], ds, 3, 0.3, seed=9)
    assert fwd.best_mean_accuracy == pytest.approx(rev.best_mean_accuracy, abs=1e-12)


def test_grid_search_skips_failing_candidate():
    ds = three_region_dataset()
    grid = [TreeParams(max_depth=-5), TreeParams(max_depth=3)]
    result = grid_search(ClassifierKind.DECISION_TREE, grid, ds, 3, 0.3, seed=10)
    assert result.candidates[0].error is not None
    assert result.best_index == 1


def test_grid_search_empty_grid_rejected():
    with pytest.raises(DataError):
        grid_search(ClassifierKind.KNN, [], three_region_dataset(), 3, 0.3, seed=0)


def test_confusion_csv_round_trip(tmp_path):
    cm = confusion([0, 1, 2, 1], [0, 1, 1, 2], 3)
    path = write_confusion_csv(tmp_path / "cm.csv", cm, ["a", "b", "c"])
    back = read_confusion_csv(path)
    assert np.array_equal(back.counts, cm.counts)


def test_accuracy_matches_direct_fraction():
    rng = np.random.default_rng(11)
    y_true = rng.integers(0, 4, 500)
    y_pred = rng.integers(0, 4, 500)
    cm = confusion(y_true, y_pred, 4)
    assert abs(cm.accuracy - float(np.mean(y_true == y_pred))) < 1e-12
