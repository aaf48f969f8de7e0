"""Six baseline classifiers behind a uniform fit / predict / predict_scores interface."""
import numpy as np

from ..errors import ConfigurationError
from .base import (
    Hyperparameters,
    ModelKind,
    TrainedModel,
    as_csr,
    check_training_data,
    model_seed,
)
from .knn import CosineKNN
from .linear import LinearSVC, LogisticRegression, lr_loss_and_grad
from .nb import MultinomialNB
from .tree import DecisionTree, RandomForest

__all__ = [
    "Hyperparameters", "ModelKind", "TrainedModel", "fit", "fit_all", "predict",
    "predict_scores", "model_seed", "MultinomialNB", "CosineKNN", "LinearSVC",
    "DecisionTree", "RandomForest", "LogisticRegression", "lr_loss_and_grad",
]


def _build(kind: ModelKind, hp: Hyperparameters) -> TrainedModel:
    seed = model_seed(hp.seed, kind)
    if kind is ModelKind.NB:
        return MultinomialNB(hp.nb_alpha)
    if kind is ModelKind.KNN:
        return CosineKNN(hp.knn_k)
    if kind is ModelKind.SVC:
        return LinearSVC(hp.svm_lambda, hp.svm_epochs, seed)
    if kind is ModelKind.DT:
        return DecisionTree(hp.dt_max_depth, hp.dt_min_split)
    if kind is ModelKind.RF:
        return RandomForest(hp.rf_trees, hp.rf_feature_fraction, hp.dt_max_depth,
                            hp.dt_min_split, hp.rf_bootstrap, seed)
    if kind is ModelKind.LR:
        return LogisticRegression(hp.lr_lambda, hp.lr_epochs, hp.lr_rate)
    raise ValueError(f"unknown model kind {kind!r}")


def fit(kind, X, y, hp: Hyperparameters = Hyperparameters(), num_classes=None) -> TrainedModel:
    """Train one classifier.  ``num_classes`` defaults to ``max(y) + 1``."""
    kind = ModelKind(kind)
    X = as_csr(X)
    y = np.asarray(y, dtype=np.int64)
    C = int(num_classes if num_classes is not None else (y.max() + 1 if len(y) else 0))
    check_training_data(X, y, C)
    if kind is ModelKind.KNN and hp.knn_k > X.shape[0]:
        raise ConfigurationError(f"knn_k={hp.knn_k} exceeds the {X.shape[0]} training samples")
    return _build(kind, hp).fit(X, y, C)


def fit_all(X, y, hp: Hyperparameters = Hyperparameters(), num_classes=None) -> list:
    """One trained model per kind, in ModelKind order."""
    return [fit(kind, X, y, hp, num_classes) for kind in ModelKind]


def predict(model: TrainedModel, X) -> np.ndarray:
    return model.predict(X)


def predict_scores(model: TrainedModel, X) -> np.ndarray:
    return model.predict_scores(X)
