"""Shared classifier interface: kinds, hyperparameters, fit dispatch."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from typing import Sequence

import numpy as np

from ..errors import DataError
from ..tabular import TabularDataset


class ClassifierKind(Enum):
    LOGISTIC_REGRESSION = "logistic_regression"
    KNN = "knn"
    GAUSSIAN_NB = "gaussian_nb"
    LINEAR_SVM = "linear_svm"
    DECISION_TREE = "decision_tree"
    RANDOM_FOREST = "random_forest"
    GRADIENT_BOOSTING = "gradient_boosting"

    @classmethod
    def from_text(cls, text: str) -> "ClassifierKind":
        key = text.strip().lower().replace("-", "_")
        for member in cls:
            if key == member.value:
                return member
        valid = ", ".join(m.value for m in cls)
        raise DataError(f"unknown classifier kind {text!r}; valid: {valid}")


@dataclass(frozen=True)
class LogRegParams:
    lr: float = 0.1
    l2: float = 1e-3
    max_iter: int = 2000
    tol: float = 1e-6


@dataclass(frozen=True)
class KnnParams:
    k: int = 5


@dataclass(frozen=True)
class GaussNbParams:
    var_smoothing: float = 1e-9


@dataclass(frozen=True)
class LinearSvmParams:
    l2: float = 1e-3
    epochs: int = 200
    lr: float = 0.1


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 12
    min_samples_split: int = 2
    min_impurity_decrease: float = 0.0


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 50
    max_features: int = 4  # ceil(sqrt(13)) for the spoofing schema
    bootstrap: bool = True
    tree: TreeParams = field(default_factory=TreeParams)


@dataclass(frozen=True)
class GbmParams:
    n_rounds: int = 100
    learning_rate: float = 0.1
    max_depth: int = 3
    subsample: float = 1.0


HyperParams = (
    LogRegParams
    | KnnParams
    | GaussNbParams
    | LinearSvmParams
    | TreeParams
    | ForestParams
    | GbmParams
)

_PARAM_TYPES: dict[ClassifierKind, type] = {
    ClassifierKind.LOGISTIC_REGRESSION: LogRegParams,
    ClassifierKind.KNN: KnnParams,
    ClassifierKind.GAUSSIAN_NB: GaussNbParams,
    ClassifierKind.LINEAR_SVM: LinearSvmParams,
    ClassifierKind.DECISION_TREE: TreeParams,
    ClassifierKind.RANDOM_FOREST: ForestParams,
    ClassifierKind.GRADIENT_BOOSTING: GbmParams,
}


def default_hyper(kind: ClassifierKind) -> HyperParams:
    return _PARAM_TYPES[kind]()


def hyper_from_dict(kind: ClassifierKind, values: dict) -> HyperParams:
    cls = _PARAM_TYPES[kind]
    if cls is ForestParams and "tree" in values:
        values = dict(values)
        values["tree"] = TreeParams(**values["tree"])
    known = {f.name for f in fields(cls)}
    unknown = set(values) - known
    if unknown:
        raise DataError(f"unknown hyperparameters for {kind.value}: {sorted(unknown)}")
    return cls(**values)


def hyper_to_dict(hyper: HyperParams) -> dict:
    return asdict(hyper)


def validate_hyper(kind: ClassifierKind, hyper: HyperParams) -> None:
    expected = _PARAM_TYPES[kind]
    if not isinstance(hyper, expected):
        raise DataError(f"{kind.value} expects {expected.__name__}, got {type(hyper).__name__}")
    counts = {
        "max_iter": getattr(hyper, "max_iter", 1),
        "k": getattr(hyper, "k", 1),
        "epochs": getattr(hyper, "epochs", 1),
        "max_depth": getattr(hyper, "max_depth", 1),
        "min_samples_split": getattr(hyper, "min_samples_split", 2),
        "n_trees": getattr(hyper, "n_trees", 1),
        "n_rounds": getattr(hyper, "n_rounds", 1),
    }
    for name, value in counts.items():
        if value < 1 and not (name == "min_samples_split" and value >= 1):
            raise DataError(f"{kind.value}: {name} must be >= 1, got {value}")
    for name in ("lr", "learning_rate"):
        rate = getattr(hyper, name, None)
        if rate is not None and rate <= 0:
            raise DataError(f"{kind.value}: {name} must be > 0, got {rate}")


class ClassifierModel:
    """Fitted model: maps feature rows to class codes and probabilities.

    ``classes`` holds the sorted class codes seen at fit time; probability
    columns follow that order. ``predict`` is the argmax with lowest-index
    tie-break (numpy argmax semantics).
    """

    kind: ClassifierKind
    classes: np.ndarray
    n_features: int
    schema: tuple[str, ...]

    def _check_X(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DataError(
                f"{self.kind.value}: expected n x {self.n_features} features, got {X.shape}"
            )
        if not np.all(np.isfinite(X)):
            raise DataError(f"{self.kind.value}: non-finite feature values")
        return X

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X: np.ndarray) -> np.ndarray:
        proba = self.predict_proba(X)
        return self.classes[np.argmax(proba, axis=1)]

    def to_payload(self) -> dict:
        raise NotImplementedError


def check_train(train: TabularDataset) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if train.n < 1:
        raise DataError("empty training set")
    if not np.all(np.isfinite(train.X)):
        raise DataError("training features contain non-finite values")
    classes = np.unique(train.y)
    return train.X, train.y, classes


class ConstantModel(ClassifierModel):
    """Degenerate single-class training set: predicts that class always."""

    def __init__(self, kind: ClassifierKind, cls: int, n_features: int, schema: Sequence[str]):
        self.kind = kind
        self.classes = np.array([cls])
        self.n_features = n_features
        self.schema = tuple(schema)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = self._check_X(X)
        return np.ones((len(X), 1))

    def to_payload(self) -> dict:
        return {
            "model": "constant",
            "class": int(self.classes[0]),
            "n_features": self.n_features,
            "schema": list(self.schema),
        }

    @classmethod
    def from_payload(cls, kind: ClassifierKind, payload: dict) -> "ConstantModel":
        return cls(kind, payload["class"], payload["n_features"], payload["schema"])
