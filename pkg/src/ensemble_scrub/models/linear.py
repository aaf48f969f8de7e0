"""Linear one-vs-rest SVM (Pegasos-style SGD) and multinomial logistic regression."""
import numpy as np
import scipy.sparse as sp

from .base import ModelKind, TrainedModel, softmax


def add_bias_column(X: sp.csr_matrix) -> sp.csr_matrix:
    return sp.hstack([X, np.ones((X.shape[0], 1))], format="csr")


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


class LinearSVC(TrainedModel):
    """One-vs-rest hinge loss with an L2 penalty, fit by stochastic subgradient steps.

    Step size at global step t is 1/(lambda*t).  The intercept is an appended
    constant feature and is penalized along with the weights.  Scores are
    per-class margins squashed through the logistic function and renormalized.
    """

    kind = ModelKind.SVC

    def __init__(self, lam=1e-4, epochs=50, seed=0):
        self.lam = lam
        self.epochs = epochs
        self.seed = seed

    def fit(self, X: sp.csr_matrix, y: np.ndarray, num_classes: int):
        self.num_classes = num_classes
        self.num_features = X.shape[1]
        Xa = add_bias_column(X)
        n = Xa.shape[0]
        rng = np.random.default_rng(self.seed)
        # W = scale * V, so the per-step shrink is O(1)
        V = np.zeros((num_classes, Xa.shape[1]))
        scale = 1.0
        indptr, indices, data = Xa.indptr, Xa.indices, Xa.data
        signs = np.where(np.arange(num_classes)[None, :] == y[:, None], 1.0, -1.0)
        t = 0
        for _ in range(self.epochs):
            for i in rng.permutation(n):
                t += 1
                eta = 1.0 / (self.lam * t)
                cols = indices[indptr[i]:indptr[i + 1]]
                vals = data[indptr[i]:indptr[i + 1]]
                margin = signs[i] * (scale * (V[:, cols] @ vals))
                if t == 1:
                    V[:] = 0.0
                    scale = 1.0
                else:
                    scale *= 1.0 - 1.0 / t
                active = margin < 1.0
                if active.any():
                    rows = np.flatnonzero(active)
                    V[np.ix_(rows, cols)] += (eta / scale) * signs[i, rows][:, None] * vals[None, :]
        W = scale * V
        self.coef_ = W[:, :-1]
        self.intercept_ = W[:, -1]
        return self

    def decision_function(self, X: sp.csr_matrix) -> np.ndarray:
        return np.asarray(X @ self.coef_.T) + self.intercept_

    def _scores(self, X):
        s = sigmoid(self.decision_function(X))
        return s / s.sum(axis=1, keepdims=True)


def lr_loss_and_grad(W: np.ndarray, Xa: sp.csr_matrix, y: np.ndarray, lam: float):
    """Mean multinomial NLL + (lam/2)*||weights||^2; last column of W is the unpenalized intercept."""
    n = Xa.shape[0]
    Z = np.asarray(Xa @ W.T)
    Z = Z - Z.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(Z).sum(axis=1))
    nll = np.mean(logsum - Z[np.arange(n), y])
    penalty = 0.5 * lam * np.sum(W[:, :-1] ** 2)
    P = np.exp(Z - logsum[:, None])
    P[np.arange(n), y] -= 1.0
    grad = np.asarray((Xa.T @ P).T) / n
    grad[:, :-1] += lam * W[:, :-1]
    return nll + penalty, grad


class LogisticRegression(TrainedModel):
    """Softmax regression fit by full-batch gradient descent with a fixed rate."""

    kind = ModelKind.LR

    def __init__(self, lam=1e-4, epochs=200, rate=0.5):
        self.lam = lam
        self.epochs = epochs
        self.rate = rate

    def fit(self, X: sp.csr_matrix, y: np.ndarray, num_classes: int):
        self.num_classes = num_classes
        self.num_features = X.shape[1]
        Xa = add_bias_column(X)
        W = np.zeros((num_classes, Xa.shape[1]))
        self.loss_history_ = []
        for _ in range(self.epochs):
            loss, grad = lr_loss_and_grad(W, Xa, y, self.lam)
            self.loss_history_.append(loss)
            W -= self.rate * grad
        self.loss_history_.append(lr_loss_and_grad(W, Xa, y, self.lam)[0])
        self.coef_ = W[:, :-1]
        self.intercept_ = W[:, -1]
        return self

    def _scores(self, X):
        return softmax(np.asarray(X @ self.coef_.T) + self.intercept_)
