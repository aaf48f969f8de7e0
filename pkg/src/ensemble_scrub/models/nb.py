import numpy as np
import scipy.sparse as sp

from .base import ModelKind, TrainedModel, softmax


class MultinomialNB(TrainedModel):
    """Multinomial naive Bayes over (possibly fractional) feature counts."""

    kind = ModelKind.NB

    def __init__(self, alpha=1.0):
        self.alpha = alpha

    def fit(self, X: sp.csr_matrix, y: np.ndarray, num_classes: int):
        self.num_classes = num_classes
        self.num_features = X.shape[1]
        onehot = sp.csr_matrix(
            (np.ones(len(y)), (np.arange(len(y)), y)), shape=(len(y), num_classes)
        )
        counts = np.asarray((onehot.T @ X).todense())
        smoothed = counts + self.alpha
        self.feature_log_prob_ = np.log(smoothed) - np.log(smoothed.sum(axis=1, keepdims=True))
        class_n = np.bincount(y, minlength=num_classes)
        self.class_log_prior_ = np.log(class_n) - np.log(class_n.sum())
        return self

    def joint_log_likelihood(self, X: sp.csr_matrix) -> np.ndarray:
        return np.asarray(X @ self.feature_log_prob_.T) + self.class_log_prior_

    def _scores(self, X):
        return softmax(self.joint_log_likelihood(X))
