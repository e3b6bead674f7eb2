"""k-nearest-neighbor classifier on standardized features.

Neighbors are ranked by (Euclidean distance, training row index); the
stable sort makes distance ties deterministic. Probabilities are the
neighbor vote fractions, so even-vote ties resolve to the lowest class
code through the shared argmax rule.
"""

from __future__ import annotations

import numpy as np

from ..tabular import Standardizer, TabularDataset
from .base import ClassifierKind, ClassifierModel, ConstantModel, KnnParams, check_train


class KnnModel(ClassifierModel):
    kind = ClassifierKind.KNN

    def __init__(self, scaler: Standardizer, X_std: np.ndarray, y: np.ndarray, k: int, classes: np.ndarray, schema):
        self.scaler = scaler
        self.X_std = X_std
        self.y = y
        self.k = k
        self.classes = classes
        self.n_features = X_std.shape[1]
        self.schema = tuple(schema)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = self._check_X(X)
        Q = self.scaler.transform(X)
        k = min(self.k, len(self.X_std))
        class_idx = np.searchsorted(self.classes, self.y)
        out = np.zeros((len(Q), len(self.classes)))
        chunk = max(1, 2_000_000 // max(len(self.X_std), 1))
        for start in range(0, len(Q), chunk):
            q = Q[start : start + chunk]
            d2 = np.sum(q**2, axis=1, keepdims=True) - 2 * q @ self.X_std.T + np.sum(self.X_std**2, axis=1)
            order = np.argsort(d2, axis=1, kind="stable")[:, :k]
            votes = class_idx[order]
            for c in range(len(self.classes)):
                out[start : start + len(q), c] = np.sum(votes == c, axis=1)
        return out / k

    def to_payload(self) -> dict:
        return {
            "model": "knn",
            "mean": self.scaler.mean.tolist(),
            "std": self.scaler.std.tolist(),
            "train_x": self.X_std.tolist(),
            "train_y": self.y.tolist(),
            "k": self.k,
            "classes": self.classes.tolist(),
            "schema": list(self.schema),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "KnnModel":
        return cls(
            Standardizer(np.array(payload["mean"]), np.array(payload["std"])),
            np.array(payload["train_x"]),
            np.array(payload["train_y"], dtype=np.int64),
            payload["k"],
            np.array(payload["classes"]),
            payload["schema"],
        )


def fit_knn(hyper: KnnParams, train: TabularDataset, seed: int) -> KnnModel:
    X, y, classes = check_train(train)
    if len(classes) < 2:
        return ConstantModel(ClassifierKind.KNN, int(classes[0]), X.shape[1], train.schema)
    scaler = Standardizer.fit(train)
    return KnnModel(scaler, scaler.transform(X), y, hyper.k, classes, train.schema)
