"""Seven classical classifiers behind one fit/predict interface."""

from __future__ import annotations

from ..errors import DataError
from ..serialize import load_document, save_document
from ..tabular import TabularDataset
from .base import (
    ClassifierKind,
    ClassifierModel,
    ConstantModel,
    ForestParams,
    GaussNbParams,
    GbmParams,
    HyperParams,
    KnnParams,
    LinearSvmParams,
    LogRegParams,
    TreeParams,
    default_hyper,
    hyper_from_dict,
    hyper_to_dict,
    validate_hyper,
)
from .bayes import GaussianNbModel, fit_gaussian_nb
from .linear import LinearSvmModel, LogisticRegressionModel, fit_linear_svm, fit_logreg, logreg_objective
from .neighbors import KnnModel, fit_knn
from .trees import (
    DecisionTreeModel,
    GradientBoostingModel,
    RandomForestModel,
    build_tree,
    fit_decision_tree,
    fit_gradient_boosting,
    fit_random_forest,
)

_FITTERS = {
    ClassifierKind.LOGISTIC_REGRESSION: fit_logreg,
    ClassifierKind.KNN: fit_knn,
    ClassifierKind.GAUSSIAN_NB: fit_gaussian_nb,
    ClassifierKind.LINEAR_SVM: fit_linear_svm,
    ClassifierKind.DECISION_TREE: fit_decision_tree,
    ClassifierKind.RANDOM_FOREST: fit_random_forest,
    ClassifierKind.GRADIENT_BOOSTING: fit_gradient_boosting,
}


def fit(kind: ClassifierKind, hyper: HyperParams, train: TabularDataset, seed: int = 0) -> ClassifierModel:
    validate_hyper(kind, hyper)
    return _FITTERS[kind](hyper, train, seed)


_MODEL_CLASSES = {
    "constant": ConstantModel,
    "logistic_regression": LogisticRegressionModel,
    "linear_svm": LinearSvmModel,
    "knn": KnnModel,
    "gaussian_nb": GaussianNbModel,
    "decision_tree": DecisionTreeModel,
    "random_forest": RandomForestModel,
    "gradient_boosting": GradientBoostingModel,
}

_DOC_KIND = "classical-model"


def save_model(path, model: ClassifierModel):
    payload = model.to_payload()
    payload["kind"] = model.kind.value
    return save_document(path, _DOC_KIND, payload)


def load_model(path) -> ClassifierModel:
    payload = load_document(path, _DOC_KIND)
    name = payload.get("model")
    if name not in _MODEL_CLASSES:
        raise DataError(f"{path}: unknown model payload {name!r}")
    cls = _MODEL_CLASSES[name]
    if name == "constant":
        return ConstantModel.from_payload(ClassifierKind.from_text(payload["kind"]), payload)
    return cls.from_payload(payload)


__all__ = [
    "ClassifierKind",
    "ClassifierModel",
    "ConstantModel",
    "HyperParams",
    "LogRegParams",
    "KnnParams",
    "GaussNbParams",
    "LinearSvmParams",
    "TreeParams",
    "ForestParams",
    "GbmParams",
    "default_hyper",
    "hyper_from_dict",
    "hyper_to_dict",
    "validate_hyper",
    "fit",
    "save_model",
    "load_model",
    "logreg_objective",
    "build_tree",
    "DecisionTreeModel",
    "RandomForestModel",
    "GradientBoostingModel",
    "LogisticRegressionModel",
    "LinearSvmModel",
    "KnnModel",
    "GaussianNbModel",
]
