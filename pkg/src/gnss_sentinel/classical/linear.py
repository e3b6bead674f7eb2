"""Multinomial logistic regression and one-vs-rest linear SVM.

Both train on internally standardized features with an appended bias
column. Logistic regression minimizes mean cross-entropy plus an L2
penalty (bias unpenalized) by Nesterov-accelerated gradient descent with
a fixed step, stopping when the gradient norm drops below ``tol``. The
SVM runs full-batch subgradient descent on the hinge loss per class;
probabilities are a softmax over the per-class margins (uncalibrated).
"""

from __future__ import annotations

import numpy as np

from ..tabular import Standardizer, TabularDataset
from .base import (
    ClassifierKind,
    ClassifierModel,
    ConstantModel,
    LinearSvmParams,
    LogRegParams,
    check_train,
)


def _one_hot(y: np.ndarray, classes: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(classes, y)
    out = np.zeros((len(y), len(classes)))
    out[np.arange(len(y)), idx] = 1.0
    return out


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _with_bias(X: np.ndarray) -> np.ndarray:
    return np.hstack([X, np.ones((len(X), 1))])


def logreg_objective(W: np.ndarray, X1: np.ndarray, Y: np.ndarray, l2: float) -> tuple[float, np.ndarray]:
    """Mean cross-entropy + 0.5*l2*||weights||^2 (bias row excluded) and its gradient.

    ``W`` has shape (d+1, K) with the bias in the last row.
    """
    n = len(X1)
    P = _softmax(X1 @ W)
    eps = 1e-300
    loss = -np.mean(np.sum(Y * np.log(P + eps), axis=1))
    penalty = 0.5 * l2 * float(np.sum(W[:-1] ** 2))
    grad = X1.T @ (P - Y) / n
    grad[:-1] += l2 * W[:-1]
    return loss + penalty, grad


class LogisticRegressionModel(ClassifierModel):
    kind = ClassifierKind.LOGISTIC_REGRESSION

    def __init__(self, scaler: Standardizer, W: np.ndarray, classes: np.ndarray, schema, grad_norm: float, converged: bool, hyper: LogRegParams):
        self.scaler = scaler
        self.W = W
        self.classes = classes
        self.n_features = W.shape[0] - 1
        self.schema = tuple(schema)
        self.grad_norm = grad_norm
        self.converged = converged
        self.hyper = hyper

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = self._check_X(X)
        return _softmax(_with_bias(self.scaler.transform(X)) @ self.W)

    def to_payload(self) -> dict:
        return {
            "model": "logistic_regression",
            "mean": self.scaler.mean.tolist(),
            "std": self.scaler.std.tolist(),
            "weights": self.W.tolist(),
            "classes": self.classes.tolist(),
            "schema": list(self.schema),
            "grad_norm": self.grad_norm,
            "converged": self.converged,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "LogisticRegressionModel":
        return cls(
            Standardizer(np.array(payload["mean"]), np.array(payload["std"])),
            np.array(payload["weights"]),
            np.array(payload["classes"]),
            payload["schema"],
            payload["grad_norm"],
            payload["converged"],
            LogRegParams(),
        )


def fit_logreg(hyper: LogRegParams, train: TabularDataset, seed: int) -> LogisticRegressionModel:
    X, y, classes = check_train(train)
    if len(classes) < 2:
        return ConstantModel(ClassifierKind.LOGISTIC_REGRESSION, int(classes[0]), X.shape[1], train.schema)
    scaler = Standardizer.fit(train)
    X1 = _with_bias(scaler.transform(X))
    Y = _one_hot(y, classes)
    W = np.zeros((X1.shape[1], len(classes)))
    V = W.copy()
    t_prev = 1.0
    grad_norm = np.inf
    converged = False
    for _ in range(hyper.max_iter):
        loss, grad = logreg_objective(V, X1, Y, hyper.l2)
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm <= hyper.tol:
            W = V
            converged = True
            break
        W_next = V - hyper.lr * grad
        t_next = (1.0 + np.sqrt(1.0 + 4.0 * t_prev**2)) / 2.0
        V = W_next + ((t_prev - 1.0) / t_next) * (W_next - W)
        W, t_prev = W_next, t_next
    else:
        _, grad = logreg_objective(W, X1, Y, hyper.l2)
        grad_norm = float(np.linalg.norm(grad))
    return LogisticRegressionModel(scaler, W, classes, train.schema, grad_norm, converged, hyper)


class LinearSvmModel(ClassifierModel):
    kind = ClassifierKind.LINEAR_SVM

    def __init__(self, scaler: Standardizer, W: np.ndarray, classes: np.ndarray, schema):
        self.scaler = scaler
        self.W = W  # (d+1, K) one column of weights per class
        self.classes = classes
        self.n_features = W.shape[0] - 1
        self.schema = tuple(schema)

    def margins(self, X: np.ndarray) -> np.ndarray:
        X = self._check_X(X)
        return _with_bias(self.scaler.transform(X)) @ self.W

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _softmax(self.margins(X))

    def to_payload(self) -> dict:
        return {
            "model": "linear_svm",
            "mean": self.scaler.mean.tolist(),
            "std": self.scaler.std.tolist(),
            "weights": self.W.tolist(),
            "classes": self.classes.tolist(),
            "schema": list(self.schema),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "LinearSvmModel":
        return cls(
            Standardizer(np.array(payload["mean"]), np.array(payload["std"])),
            np.array(payload["weights"]),
            np.array(payload["classes"]),
            payload["schema"],
        )


def fit_linear_svm(hyper: LinearSvmParams, train: TabularDataset, seed: int) -> LinearSvmModel:
    X, y, classes = check_train(train)
    if len(classes) < 2:
        return ConstantModel(ClassifierKind.LINEAR_SVM, int(classes[0]), X.shape[1], train.schema)
    scaler = Standardizer.fit(train)
    X1 = _with_bias(scaler.transform(X))
    n, d1 = X1.shape
    W = np.zeros((d1, len(classes)))
    for c, cls in enumerate(classes):
        sign = np.where(y == cls, 1.0, -1.0)
        w = np.zeros(d1)
        for epoch in range(hyper.epochs):
            step = hyper.lr / (1.0 + 0.01 * epoch)
            margins = X1 @ w
            violating = sign * margins < 1.0
            grad = -X1[violating].T @ sign[violating] / n
            grad[:-1] += hyper.l2 * w[:-1]
            w = w - step * grad
        W[:, c] = w
    return LinearSvmModel(scaler, W, classes, train.schema)
