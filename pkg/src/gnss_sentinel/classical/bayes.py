"""Gaussian naive Bayes with variance smoothing.

Per class and feature: population mean and variance, with
``var_smoothing * max feature variance`` added to every variance for
numerical stability. Probabilities are the normalized class-conditional
joint densities times priors.
"""

from __future__ import annotations

import numpy as np

from ..tabular import TabularDataset
from .base import ClassifierKind, ClassifierModel, ConstantModel, GaussNbParams, check_train


class GaussianNbModel(ClassifierModel):
    kind = ClassifierKind.GAUSSIAN_NB

    def __init__(self, priors: np.ndarray, means: np.ndarray, variances: np.ndarray, classes: np.ndarray, schema):
        self.priors = priors  # (K,)
        self.means = means  # (K, d)
        self.variances = variances  # (K, d) smoothed
        self.classes = classes
        self.n_features = means.shape[1]
        self.schema = tuple(schema)

    def log_joint(self, X: np.ndarray) -> np.ndarray:
        X = self._check_X(X)
        out = np.empty((len(X), len(self.classes)))
        for c in range(len(self.classes)):
            diff = X - self.means[c]
            log_pdf = -0.5 * (np.log(2 * np.pi * self.variances[c]) + diff**2 / self.variances[c])
            out[:, c] = np.log(self.priors[c]) + log_pdf.sum(axis=1)
        return out

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        lj = self.log_joint(X)
        lj -= lj.max(axis=1, keepdims=True)
        p = np.exp(lj)
        return p / p.sum(axis=1, keepdims=True)

    def to_payload(self) -> dict:
        return {
            "model": "gaussian_nb",
            "priors": self.priors.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "classes": self.classes.tolist(),
            "schema": list(self.schema),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "GaussianNbModel":
        return cls(
            np.array(payload["priors"]),
            np.array(payload["means"]),
            np.array(payload["variances"]),
            np.array(payload["classes"]),
            payload["schema"],
        )


def fit_gaussian_nb(hyper: GaussNbParams, train: TabularDataset, seed: int) -> GaussianNbModel:
    X, y, classes = check_train(train)
    if len(classes) < 2:
        return ConstantModel(ClassifierKind.GAUSSIAN_NB, int(classes[0]), X.shape[1], train.schema)
    K, d = len(classes), X.shape[1]
    priors = np.empty(K)
    means = np.empty((K, d))
    variances = np.empty((K, d))
    epsilon = hyper.var_smoothing * float(X.var(axis=0).max())
    for c, cls in enumerate(classes):
        rows = X[y == cls]
        priors[c] = len(rows) / len(X)
        means[c] = rows.mean(axis=0)
        variances[c] = rows.var(axis=0) + epsilon
    if np.any(variances <= 0):
        variances += 1e-12  # all-constant training features
    return GaussianNbModel(priors, means, variances, classes, train.schema)
