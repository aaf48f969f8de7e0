from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional

import numpy as np
import scipy.sparse as sp

from ..errors import ConfigurationError, ContractError, TrainingError


class ModelKind(IntEnum):
    """The six baseline classifiers; the ordinal is the bias-vector index."""

    NB = 0
    KNN = 1
    SVC = 2
    DT = 3
    RF = 4
    LR = 5

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    ModelKind.NB: "Naive Bayes",
    ModelKind.KNN: "KNN",
    ModelKind.SVC: "SVC",
    ModelKind.DT: "Decision Tree",
    ModelKind.RF: "Random Forest",
    ModelKind.LR: "Logistic Regression",
}


@dataclass(frozen=True)
class Hyperparameters:
    nb_alpha: float = 1.0
    knn_k: int = 5
    svm_lambda: float = 1e-4
    svm_epochs: int = 50
    dt_max_depth: int = 50
    dt_min_split: int = 2
    rf_trees: int = 100
    # None means sqrt(F)/F, i.e. ceil(sqrt(F)) candidates per split
    rf_feature_fraction: Optional[float] = None
    rf_bootstrap: bool = True
    lr_lambda: float = 1e-4
    lr_epochs: int = 200
    lr_rate: float = 0.5
    seed: int = 42

    def __post_init__(self):
        counts = dict(knn_k=self.knn_k, svm_epochs=self.svm_epochs, dt_max_depth=self.dt_max_depth,
                      dt_min_split=self.dt_min_split, rf_trees=self.rf_trees, lr_epochs=self.lr_epochs)
        for name, v in counts.items():
            if v < 1:
                raise ConfigurationError(f"{name} must be >= 1, got {v}")
        for name in ("nb_alpha", "svm_lambda", "lr_lambda"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be >= 0")
        if self.svm_lambda == 0:
            raise ConfigurationError("svm_lambda must be > 0 (it sets the SGD step size)")
        if self.lr_rate <= 0:
            raise ConfigurationError("lr_rate must be > 0")
        f = self.rf_feature_fraction
        if f is not None and not 0 < f <= 1:
            raise ConfigurationError(f"rf_feature_fraction must lie in (0, 1], got {f}")


def model_seed(master_seed: int, kind: ModelKind) -> int:
    return master_seed * 1000 + int(kind)


def as_csr(X) -> sp.csr_matrix:
    if sp.issparse(X):
        return sp.csr_matrix(X, dtype=float)
    return sp.csr_matrix(np.atleast_2d(np.asarray(X, dtype=float)))


def check_training_data(X: sp.csr_matrix, y: np.ndarray, num_classes: int) -> None:
    if X.shape[0] != len(y):
        raise ContractError(f"X has {X.shape[0]} rows but y has {len(y)} labels")
    if len(y) < num_classes:
        raise TrainingError(f"{len(y)} samples cannot cover {num_classes} classes")
    if len(y) and (y.min() < 0 or y.max() >= num_classes):
        raise ContractError(f"labels must lie in [0, {num_classes})")
    missing = np.flatnonzero(np.bincount(y, minlength=num_classes) == 0)
    if missing.size:
        raise TrainingError(f"classes {missing.tolist()} have no training samples")


class TrainedModel:
    kind: ModelKind
    num_classes: int
    num_features: int

    def _scores(self, X: sp.csr_matrix) -> np.ndarray:
        raise NotImplementedError

    def predict_scores(self, X) -> np.ndarray:
        X = as_csr(X)
        if X.shape[1] != self.num_features:
            raise ContractError(
                f"{self.kind.name} expects {self.num_features} features, got {X.shape[1]}"
            )
        if X.shape[0] == 0:
            return np.zeros((0, self.num_classes))
        return self._scores(X)

    def predict(self, X) -> np.ndarray:
        # np.argmax returns the first maximum, i.e. ties go to the lowest class id
        return np.argmax(self.predict_scores(X), axis=1).astype(np.int64)


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def n_candidate_features(fraction: Optional[float], n_features: int) -> int:
    if fraction is None:
        return max(1, math.ceil(math.sqrt(n_features)))
    return max(1, math.ceil(fraction * n_features))
