"""SMOTE oversampling of sparse feature rows."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, ContractError
from .models.base import as_csr

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SmoteConfig:
    k_neighbors: int = 5
    seed: int = 42

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ConfigurationError("k_neighbors must be >= 1")


def interpolate(x_i, x_nn, u):
    """``x_i + u * (x_nn - x_i)`` row-wise, written as a convex combination."""
    u = np.asarray(u, dtype=float)
    if sp.issparse(x_i):
        return sp.csr_matrix(sp.diags(1.0 - u) @ x_i + sp.diags(u) @ x_nn)
    x_i, x_nn = np.asarray(x_i, dtype=float), np.asarray(x_nn, dtype=float)
    if u.ndim:
        u = u[:, None]
    return (1.0 - u) * x_i + u * x_nn


def same_class_neighbors(Xc: sp.csr_matrix, k: int) -> np.ndarray:
    """k nearest other rows by Euclidean distance; equal distances keep row order."""
    G = (Xc @ Xc.T).toarray()
    sq = np.diag(G)
    d2 = sq[:, None] + sq[None, :] - 2.0 * G
    np.fill_diagonal(d2, np.inf)
    return np.argsort(d2, axis=1, kind="stable")[:, :k]


def oversample_with_provenance(X, y, config: SmoteConfig = SmoteConfig()):
    """Like :func:`oversample` but also returns an ``(n_synthetic, 2)`` array of parent rows.

    Parent indices refer to rows of the input ``X``; a singleton class yields
    duplicates whose two parents are the same row.
    """
    X = as_csr(X)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] != len(y):
        raise ContractError("X and y lengths differ")
    classes, counts = np.unique(y, return_counts=True)
    target = counts.max()
    rng = np.random.default_rng(config.seed)
    base, nbr, weight, labels = [], [], [], []
    for c, n_c in zip(classes, counts):
        need = target - n_c
        if need == 0:
            continue
        members = np.flatnonzero(y == c)
        if n_c == 1:
            log.warning("class %d has a single sample; duplicating it %d times", c, need)
            base.append(np.repeat(members, need))
            nbr.append(np.repeat(members, need))
            weight.append(np.zeros(need))
        else:
            k = min(config.k_neighbors, n_c - 1)
            nn = same_class_neighbors(X[members], k)
            pick = rng.integers(0, n_c, size=need)
            which = rng.integers(0, k, size=need)
            base.append(members[pick])
            nbr.append(members[nn[pick, which]])
            weight.append(rng.random(need))
        labels.append(np.full(need, c))
    if not labels:
        return X.copy(), y.copy(), np.zeros((0, 2), dtype=np.int64)
    base = np.concatenate(base)
    nbr = np.concatenate(nbr)
    u = np.concatenate(weight)
    synth = interpolate(X[base], X[nbr], u)
    synth.eliminate_zeros()
    X_out = sp.vstack([X, synth], format="csr")
    y_out = np.concatenate([y, np.concatenate(labels)])
    return X_out, y_out, np.column_stack([base, nbr])


def oversample(X, y, config: SmoteConfig = SmoteConfig()):
    """Synthesize minority rows until every class matches the largest class.

    Each new row is ``x_i + u * (x_nn - x_i)`` for a random same-class sample
    ``x_i``, one of its k nearest same-class neighbours ``x_nn`` and uniform
    ``u``.  Originals come first and unchanged; synthetic rows are not
    re-normalized.
    """
    X_out, y_out, _ = oversample_with_provenance(X, y, config)
    return X_out, y_out
