import numpy as np
import scipy.sparse as sp

from .base import ModelKind, TrainedModel

_QUERY_BLOCK = 512


def l2_normalize_rows(X: sp.csr_matrix) -> sp.csr_matrix:
    norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    norms[norms == 0] = 1.0
    return sp.csr_matrix(sp.diags(1.0 / norms) @ X)


class CosineKNN(TrainedModel):
    """k-nearest neighbours by cosine similarity; scores are neighbour vote fractions.

    Equal similarities are ranked by training-row order.
    """

    kind = ModelKind.KNN

    def __init__(self, k=5):
        self.k = k

    def fit(self, X: sp.csr_matrix, y: np.ndarray, num_classes: int):
        self.num_classes = num_classes
        self.num_features = X.shape[1]
        self.train_ = l2_normalize_rows(X)
        self.labels_ = np.asarray(y, dtype=np.int64)
        return self

    def neighbors(self, X: sp.csr_matrix) -> np.ndarray:
        Q = l2_normalize_rows(X)
        out = []
        for start in range(0, Q.shape[0], _QUERY_BLOCK):
            sims = (Q[start:start + _QUERY_BLOCK] @ self.train_.T).toarray()
            out.append(np.argsort(-sims, axis=1, kind="stable")[:, : self.k])
        return np.vstack(out)

    def _scores(self, X):
        votes = self.labels_[self.neighbors(X)]
        scores = np.zeros((votes.shape[0], self.num_classes))
        rows = np.repeat(np.arange(votes.shape[0]), votes.shape[1])
        np.add.at(scores, (rows, votes.ravel()), 1.0)
        return scores / self.k
