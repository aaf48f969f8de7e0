"""CART (Gini) decision trees and a bootstrap random forest over sparse features.

Split candidates are restricted to features that are non-zero somewhere in
the node; a feature that is zero on every node sample cannot split it, so for
a decision tree this is the same search as scanning all F features.  A forest
draws its per-split candidates from that same active set.
"""
import numpy as np
import scipy.sparse as sp

from .base import ModelKind, TrainedModel, n_candidate_features

# bound on elements in the (samples x features x classes) cumulative-count block
_BLOCK_ELEMS = 4_000_000
# bound on dense elements materialized per prediction block
_PREDICT_ELEMS = 20_000_000


def _best_split(Xn: np.ndarray, onehot: np.ndarray, features: np.ndarray):
    """Return (score, feature, threshold) maximizing sum(cl^2)/nl + sum(cr^2)/nr.

    Maximizing that score minimizes the weighted Gini impurity of the children.
    Ties go to the lowest feature index, then the lowest threshold.
    """
    n, C = onehot.shape
    total = onehot.sum(axis=0)
    nl = np.arange(1, n, dtype=float)[:, None]
    nr = n - nl
    best = (-np.inf, -1, 0.0)
    step = max(1, _BLOCK_ELEMS // max(1, n * C))
    for start in range(0, Xn.shape[1], step):
        block = Xn[:, start:start + step]
        order = np.argsort(block, axis=0, kind="stable")
        xs = np.take_along_axis(block, order, axis=0)
        left = np.cumsum(onehot[order], axis=0)[:-1]  # (n-1, f, C)
        right = total - left
        score = (left ** 2).sum(axis=2) / nl + (right ** 2).sum(axis=2) / nr
        valid = xs[:-1] < xs[1:]
        score = np.where(valid, score, -np.inf)
        pos = np.argmax(score, axis=0)
        col_best = score[pos, np.arange(score.shape[1])]
        j = int(np.argmax(col_best))
        if col_best[j] > best[0]:
            i = pos[j]
            lo, hi = xs[i, j], xs[i + 1, j]
            thr = 0.5 * (lo + hi)
            if not lo <= thr < hi:
                thr = lo
            best = (float(col_best[j]), int(features[start + j]), float(thr))
    return best


class _TreeBuilder:
    def __init__(self, X: sp.csr_matrix, y: np.ndarray, num_classes: int, max_depth: int,
                 min_split: int, n_candidates: int, rng):
        self.X = X
        self.y = y
        self.C = num_classes
        self.max_depth = max_depth
        self.min_split = max(2, min_split)
        self.n_candidates = n_candidates
        self.rng = rng
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []

    def _new_node(self, counts):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(counts / counts.sum())
        return len(self.feature) - 1

    def build(self):
        rows = np.arange(self.X.shape[0])
        stack = [(rows, 0, None, False)]
        while stack:
            rows, depth, parent, is_right = stack.pop()
            y = self.y[rows]
            counts = np.bincount(y, minlength=self.C).astype(float)
            node = self._new_node(counts)
            if parent is not None:
                (self.right if is_right else self.left)[parent] = node
            if depth >= self.max_depth or len(rows) < self.min_split or (counts > 0).sum() == 1:
                continue
            sub = self.X[rows]
            active = np.unique(sub.indices)
            if active.size == 0:
                continue
            if self.n_candidates < active.size:
                active = np.sort(self.rng.choice(active, size=self.n_candidates, replace=False))
            Xn = sub[:, active].toarray()
            onehot = np.eye(self.C)[y]
            score, feat, thr = _best_split(Xn, onehot, active)
            if feat < 0:
                continue
            col = Xn[:, np.searchsorted(active, feat)]
            go_left = col <= thr
            self.feature[node] = feat
            self.threshold[node] = thr
            # right pushed first so the left subtree is numbered first
            stack.append((rows[~go_left], depth + 1, node, True))
            stack.append((rows[go_left], depth + 1, node, False))
        return _Tree(
            np.array(self.feature, dtype=np.int64),
            np.array(self.threshold, dtype=float),
            np.array(self.left, dtype=np.int64),
            np.array(self.right, dtype=np.int64),
            np.array(self.value, dtype=float),
        )


class _Tree:
    def __init__(self, feature, threshold, left, right, value):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.value = value

    @property
    def node_count(self):
        return len(self.feature)

    def apply_dense(self, Xd: np.ndarray) -> np.ndarray:
        """Leaf index for each row of a dense matrix."""
        leaf = np.zeros(Xd.shape[0], dtype=np.int64)
        stack = [(0, np.arange(Xd.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            f = self.feature[node]
            if f < 0:
                leaf[idx] = node
                continue
            go_left = Xd[idx, f] <= self.threshold[node]
            stack.append((self.left[node], idx[go_left]))
            stack.append((self.right[node], idx[~go_left]))
        return leaf


def _dense_blocks(X: sp.csr_matrix):
    step = max(1, _PREDICT_ELEMS // max(1, X.shape[1]))
    for start in range(0, X.shape[0], step):
        yield start, X[start:start + step].toarray()


def build_tree(X, y, num_classes, max_depth, min_split, n_candidates, rng) -> _Tree:
    return _TreeBuilder(X, y, num_classes, max_depth, min_split, n_candidates, rng).build()


class DecisionTree(TrainedModel):
    """CART with Gini impurity; scores are leaf class proportions."""

    kind = ModelKind.DT

    def __init__(self, max_depth=50, min_split=2):
        self.max_depth = max_depth
        self.min_split = min_split

    def fit(self, X: sp.csr_matrix, y: np.ndarray, num_classes: int):
        self.num_classes = num_classes
        self.num_features = X.shape[1]
        self.tree_ = build_tree(X, y, num_classes, self.max_depth, self.min_split,
                                X.shape[1], None)
        return self

    def _scores(self, X):
        out = np.empty((X.shape[0], self.num_classes))
        for start, Xd in _dense_blocks(X):
            out[start:start + len(Xd)] = self.tree_.value[self.tree_.apply_dense(Xd)]
        return out


class RandomForest(TrainedModel):
    """Bootstrap-aggregated CART trees; scores are mean leaf proportions."""

    kind = ModelKind.RF

    def __init__(self, n_trees=100, feature_fraction=None, max_depth=50, min_split=2,
                 bootstrap=True, seed=0):
        self.n_trees = n_trees
        self.feature_fraction = feature_fraction
        self.max_depth = max_depth
        self.min_split = min_split
        self.bootstrap = bootstrap
        self.seed = seed

    def fit(self, X: sp.csr_matrix, y: np.ndarray, num_classes: int):
        self.num_classes = num_classes
        self.num_features = X.shape[1]
        n = X.shape[0]
        m = n_candidate_features(self.feature_fraction, X.shape[1])
        rng = np.random.default_rng(self.seed)
        self.trees_ = []
        for _ in range(self.n_trees):
            if self.bootstrap:
                rows = np.sort(rng.integers(0, n, size=n))
                Xt, yt = X[rows], y[rows]
            else:
                Xt, yt = X, y
            self.trees_.append(
                build_tree(Xt, yt, num_classes, self.max_depth, self.min_split, m, rng)
            )
        return self

    def _scores(self, X):
        out = np.zeros((X.shape[0], self.num_classes))
        for start, Xd in _dense_blocks(X):
            acc = np.zeros((len(Xd), self.num_classes))
            for tree in self.trees_:
                acc += tree.value[tree.apply_dense(Xd)]
            out[start:start + len(Xd)] = acc / len(self.trees_)
        return out
