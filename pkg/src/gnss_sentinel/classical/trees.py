"""CART trees, bootstrapped forests, and gradient-boosted ensembles.

One split engine serves all three: exhaustive scan over (feature, midpoint
threshold) candidates, Gini impurity for classification and variance
reduction for the boosting regression trees. Gain ties break toward the
lower feature index, then the lower threshold, by scanning features in
ascending order and accepting only strictly better gains. Rows with
``x <= threshold`` go left.

The boosting stage fits one regression tree per class per round to the
softmax negative gradients (multinomial deviance), with Newton-style leaf
values and shrinkage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from ..rng import make_rng
from ..tabular import TabularDataset
from .base import (
    ClassifierKind,
    ClassifierModel,
    ConstantModel,
    ForestParams,
    GbmParams,
    TreeParams,
    check_train,
)

_NO_GAIN = 1e-15


@dataclass
class TreeNodes:
    """Flat node arrays; feature == -1 marks a leaf."""

    feature: np.ndarray  # (n_nodes,) int
    threshold: np.ndarray  # (n_nodes,) float
    left: np.ndarray  # (n_nodes,) int child ids
    right: np.ndarray
    value: np.ndarray  # (n_nodes, K) class distribution or (n_nodes, 1) regression value

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf id for every row."""
        cur = np.zeros(len(X), dtype=np.int64)
        while True:
            feat = self.feature[cur]
            active = np.flatnonzero(feat >= 0)
            if len(active) == 0:
                return cur
            rows = X[active, feat[active]]
            go_left = rows <= self.threshold[cur[active]]
            cur[active] = np.where(go_left, self.left[cur[active]], self.right[cur[active]])

    def to_payload(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "TreeNodes":
        return cls(
            np.array(payload["feature"], dtype=np.int64),
            np.array(payload["threshold"], dtype=np.float64),
            np.array(payload["left"], dtype=np.int64),
            np.array(payload["right"], dtype=np.int64),
            np.array(payload["value"], dtype=np.float64),
        )


def _best_split_gini(X: np.ndarray, y_idx: np.ndarray, K: int, feats: np.ndarray):
    """Max Gini gain over (feature, midpoint); returns (feat, thr, gain) or None."""
    n = len(y_idx)
    onehot = np.zeros((n, K))
    onehot[np.arange(n), y_idx] = 1.0
    total = onehot.sum(axis=0)
    parent_ss = float(np.sum(total**2))
    # n * weighted child impurity = n - sum_c cL^2/nL - sum_c cR^2/nR; minimize it.
    best = None
    for j in feats:
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        valid = np.flatnonzero(xs[1:] > xs[:-1]) + 1  # left sizes with a real boundary
        if len(valid) == 0:
            continue
        cum = np.cumsum(onehot[order], axis=0)
        n_left = valid.astype(np.float64)
        n_right = n - n_left
        ss_left = np.sum(cum[valid - 1] ** 2, axis=1)
        ss_right = np.sum((total - cum[valid - 1]) ** 2, axis=1)
        impurity = n - ss_left / n_left - ss_right / n_right
        pick = int(np.argmin(impurity))
        gain = ((n - parent_ss / n) - impurity[pick]) / n
        if best is None or gain > best[2]:
            i = valid[pick]
            best = (int(j), float((xs[i - 1] + xs[i]) / 2), float(gain))
    return best


def _best_split_mse(X: np.ndarray, r: np.ndarray, feats: np.ndarray):
    """Max variance reduction; same tie rules as the Gini scan."""
    n = len(r)
    sse_parent = float(np.sum(r**2) - np.sum(r) ** 2 / n)
    best = None
    for j in feats:
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        valid = np.flatnonzero(xs[1:] > xs[:-1]) + 1
        if len(valid) == 0:
            continue
        rs = r[order]
        cum = np.cumsum(rs)
        cum2 = np.cumsum(rs**2)
        n_left = valid.astype(np.float64)
        n_right = n - n_left
        sse_left = cum2[valid - 1] - cum[valid - 1] ** 2 / n_left
        sse_right = (cum2[-1] - cum2[valid - 1]) - (cum[-1] - cum[valid - 1]) ** 2 / n_right
        sse = sse_left + sse_right
        pick = int(np.argmin(sse))
        gain = (sse_parent - sse[pick]) / n
        if best is None or gain > best[2]:
            i = valid[pick]
            best = (int(j), float((xs[i - 1] + xs[i]) / 2), float(gain))
    return best


def build_tree(
    X: np.ndarray,
    target: np.ndarray,
    K: int,
    params: TreeParams,
    *,
    criterion: str = "gini",
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
    leaf_indices: bool = False,
):
    """Depth-first CART construction over flat node arrays.

    ``target`` is class indices (gini) or residuals (mse). With
    ``leaf_indices`` the per-leaf row index lists are returned as well so
    callers can recompute leaf values.
    """
    n, d = X.shape
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    values: list[np.ndarray] = []
    leaf_rows: dict[int, np.ndarray] = {}

    def node_value(idx: np.ndarray) -> np.ndarray:
        if criterion == "gini":
            counts = np.bincount(target[idx], minlength=K).astype(np.float64)
            return counts / counts.sum()
        return np.array([float(np.mean(target[idx]))])

    def is_pure(idx: np.ndarray) -> bool:
        if criterion == "gini":
            return len(np.unique(target[idx])) == 1
        return bool(np.all(target[idx] == target[idx][0]))

    stack: list[tuple[np.ndarray, int, int]] = []  # (row indices, depth, node id)
    feature.append(-1)
    threshold.append(0.0)
    left.append(-1)
    right.append(-1)
    values.append(np.zeros(K if criterion == "gini" else 1))
    stack.append((np.arange(n), 0, 0))

    while stack:
        idx, depth, node = stack.pop()
        values[node] = node_value(idx)
        if (
            depth >= params.max_depth
            or len(idx) < params.min_samples_split
            or len(idx) < 2
            or is_pure(idx)
        ):
            if leaf_indices:
                leaf_rows[node] = idx
            continue
        if max_features is not None and max_features < d and rng is not None:
            feats = np.sort(rng.choice(d, size=max_features, replace=False))
        else:
            feats = np.arange(d)
        Xn = X[idx]
        if criterion == "gini":
            split = _best_split_gini(Xn, target[idx], K, feats)
        else:
            split = _best_split_mse(Xn, target[idx], feats)
        if split is None or split[2] <= _NO_GAIN or split[2] < params.min_impurity_decrease:
            if leaf_indices:
                leaf_rows[node] = idx
            continue
        j, thr, _gain = split
        go_left = Xn[:, j] <= thr
        feature[node] = j
        threshold[node] = thr
        left_id = len(feature)
        right_id = left_id + 1
        left[node] = left_id
        right[node] = right_id
        for _ in range(2):
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            values.append(np.zeros(K if criterion == "gini" else 1))
        # Push right first so the left child is processed next (fixed order).
        stack.append((idx[~go_left], depth + 1, right_id))
        stack.append((idx[go_left], depth + 1, left_id))

    nodes = TreeNodes(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=np.float64),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.vstack(values),
    )
    if leaf_indices:
        return nodes, leaf_rows
    return nodes


class DecisionTreeModel(ClassifierModel):
    kind = ClassifierKind.DECISION_TREE

    def __init__(self, nodes: TreeNodes, classes: np.ndarray, n_features: int, schema):
        self.nodes = nodes
        self.classes = classes
        self.n_features = n_features
        self.schema = tuple(schema)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = self._check_X(X)
        return self.nodes.value[self.nodes.apply(X)]

    def to_payload(self) -> dict:
        return {
            "model": "decision_tree",
            "nodes": self.nodes.to_payload(),
            "classes": self.classes.tolist(),
            "n_features": self.n_features,
            "schema": list(self.schema),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "DecisionTreeModel":
        return cls(
            TreeNodes.from_payload(payload["nodes"]),
            np.array(payload["classes"]),
            payload["n_features"],
            payload["schema"],
        )


def fit_decision_tree(hyper: TreeParams, train: TabularDataset, seed: int) -> DecisionTreeModel:
    X, y, classes = check_train(train)
    if len(classes) < 2:
        return ConstantModel(ClassifierKind.DECISION_TREE, int(classes[0]), X.shape[1], train.schema)
    y_idx = np.searchsorted(classes, y)
    nodes = build_tree(X, y_idx, len(classes), hyper, criterion="gini")
    return DecisionTreeModel(nodes, classes, X.shape[1], train.schema)


class RandomForestModel(ClassifierModel):
    kind = ClassifierKind.RANDOM_FOREST

    def __init__(self, trees: list[TreeNodes], classes: np.ndarray, n_features: int, schema):
        self.trees = trees
        self.classes = classes
        self.n_features = n_features
        self.schema = tuple(schema)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Majority vote: probability is the fraction of trees voting a class."""
        X = self._check_X(X)
        votes = np.zeros((len(X), len(self.classes)))
        for tree in self.trees:
            picks = np.argmax(tree.value[tree.apply(X)], axis=1)
            votes[np.arange(len(X)), picks] += 1.0
        return votes / len(self.trees)

    def to_payload(self) -> dict:
        return {
            "model": "random_forest",
            "trees": [t.to_payload() for t in self.trees],
            "classes": self.classes.tolist(),
            "n_features": self.n_features,
            "schema": list(self.schema),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "RandomForestModel":
        return cls(
            [TreeNodes.from_payload(t) for t in payload["trees"]],
            np.array(payload["classes"]),
            payload["n_features"],
            payload["schema"],
        )


def fit_random_forest(hyper: ForestParams, train: TabularDataset, seed: int) -> RandomForestModel:
    X, y, classes = check_train(train)
    if len(classes) < 2:
        return ConstantModel(ClassifierKind.RANDOM_FOREST, int(classes[0]), X.shape[1], train.schema)
    y_idx = np.searchsorted(classes, y)
    trees = []
    for t in range(hyper.n_trees):
        rng = make_rng(seed, "tree", t)
        if hyper.bootstrap:
            rows = rng.integers(0, len(X), len(X))
        else:
            rows = np.arange(len(X))
        trees.append(
            build_tree(
                X[rows],
                y_idx[rows],
                len(classes),
                hyper.tree,
                criterion="gini",
                max_features=hyper.max_features,
                rng=rng,
            )
        )
    return RandomForestModel(trees, classes, X.shape[1], train.schema)


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class GradientBoostingModel(ClassifierModel):
    kind = ClassifierKind.GRADIENT_BOOSTING

    def __init__(
        self,
        rounds: list[list[TreeNodes]],
        learning_rate: float,
        classes: np.ndarray,
        n_features: int,
        schema,
        train_deviance: list[float],
    ):
        self.rounds = rounds  # rounds[r][c] regression tree for class c
        self.learning_rate = learning_rate
        self.classes = classes
        self.n_features = n_features
        self.schema = tuple(schema)
        self.train_deviance = train_deviance

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        X = self._check_X(X)
        F = np.zeros((len(X), len(self.classes)))
        for round_trees in self.rounds:
            for c, tree in enumerate(round_trees):
                F[:, c] += self.learning_rate * tree.value[tree.apply(X), 0]
        return F

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _softmax(self.decision_scores(X))

    def to_payload(self) -> dict:
        return {
            "model": "gradient_boosting",
            "rounds": [[t.to_payload() for t in r] for r in self.rounds],
            "learning_rate": self.learning_rate,
            "classes": self.classes.tolist(),
            "n_features": self.n_features,
            "schema": list(self.schema),
            "train_deviance": self.train_deviance,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "GradientBoostingModel":
        return cls(
            [[TreeNodes.from_payload(t) for t in r] for r in payload["rounds"]],
            payload["learning_rate"],
            np.array(payload["classes"]),
            payload["n_features"],
            payload["schema"],
            payload["train_deviance"],
        )


def fit_gradient_boosting(hyper: GbmParams, train: TabularDataset, seed: int) -> GradientBoostingModel:
    X, y, classes = check_train(train)
    if len(classes) < 2:
        return ConstantModel(ClassifierKind.GRADIENT_BOOSTING, int(classes[0]), X.shape[1], train.schema)
    if not (0.0 < hyper.subsample <= 1.0):
        raise DataError(f"gbm subsample must be in (0, 1], got {hyper.subsample}")
    n, K = len(X), len(classes)
    y_idx = np.searchsorted(classes, y)
    Y = np.zeros((n, K))
    Y[np.arange(n), y_idx] = 1.0
    tree_params = TreeParams(max_depth=hyper.max_depth, min_samples_split=2, min_impurity_decrease=0.0)
    F = np.zeros((n, K))
    rounds: list[list[TreeNodes]] = []
    deviance: list[float] = []
    for r in range(hyper.n_rounds):
        P = _softmax(F)
        G = Y - P  # negative gradient of multinomial deviance
        if hyper.subsample < 1.0:
            rng = make_rng(seed, "round", r)
            m = max(2, int(round(hyper.subsample * n)))
            rows = np.sort(rng.permutation(n)[:m])
        else:
            rows = np.arange(n)
        round_trees: list[TreeNodes] = []
        for c in range(K):
            resid = G[rows, c]
            nodes, leaf_rows = build_tree(
                X[rows], resid, K, tree_params, criterion="mse", leaf_indices=True
            )
            # Newton-style leaf value for multinomial deviance.
            for leaf, members in leaf_rows.items():
                rl = resid[members]
                denom = float(np.sum(np.abs(rl) * (1.0 - np.abs(rl))))
                if denom < 1e-150:
                    gamma = 0.0
                else:
                    gamma = (K - 1) / K * float(np.sum(rl)) / denom
                nodes.value[leaf, 0] = gamma
            F[:, c] += hyper.learning_rate * nodes.value[nodes.apply(X), 0]
            round_trees.append(nodes)
        rounds.append(round_trees)
        logp = F - F.max(axis=1, keepdims=True)
        logp = logp - np.log(np.sum(np.exp(logp), axis=1, keepdims=True))
        deviance.append(float(-np.mean(logp[np.arange(n), y_idx])))
    return GradientBoostingModel(rounds, hyper.learning_rate, classes, X.shape[1], train.schema, deviance)
