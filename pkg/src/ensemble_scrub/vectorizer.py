"""TF-IDF with smoothed idf and L2-normalized rows, stored as scipy CSR matrices."""
from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ContractError, DegenerateDataError


@dataclass(frozen=True)
class Vocabulary:
    term_to_index: dict[str, int]
    doc_freq: np.ndarray
    num_docs: int

    @property
    def terms(self) -> list[str]:
        out = [""] * len(self.term_to_index)
        for t, i in self.term_to_index.items():
            out[i] = t
        return out

    def __len__(self) -> int:
        return len(self.term_to_index)


@dataclass(frozen=True)
class TfidfModel:
    vocab: Vocabulary
    idf: np.ndarray
    min_df: int = 2
    max_features: int = 20000

    @property
    def num_features(self) -> int:
        return len(self.vocab)

    def transform(self, doc: Sequence[str]) -> sp.csr_matrix:
        """One document as a 1 x F row."""
        return self.transform_many([doc])

    def transform_many(self, docs: Sequence[Sequence[str]]) -> sp.csr_matrix:
        index = self.vocab.term_to_index
        indptr = [0]
        indices: list[int] = []
        data: list[float] = []
        for doc in docs:
            counts = Counter(index[t] for t in doc if t in index)
            cols = sorted(counts)
            if cols:
                w = np.array([counts[c] for c in cols], dtype=float) * self.idf[cols]
                w /= math.sqrt(float(np.dot(w, w)))
                indices.extend(cols)
                data.extend(w.tolist())
            indptr.append(len(indices))
        return sp.csr_matrix(
            (np.array(data, dtype=float), np.array(indices, dtype=np.int64), np.array(indptr)),
            shape=(len(docs), self.num_features),
        )

    def dump_csv(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["term", "df", "idf"])
            for i, term in enumerate(self.vocab.terms):
                w.writerow([term, int(self.vocab.doc_freq[i]), repr(float(self.idf[i]))])


def smoothed_idf(df, n_docs: int):
    return np.log((1.0 + n_docs) / (1.0 + np.asarray(df, dtype=float))) + 1.0


def fit(corpus: Sequence[Sequence[str]], min_df: int = 2, max_features: int = 20000) -> TfidfModel:
    """Fit vocabulary and idf weights.

    Terms need ``df >= min_df``; if more than ``max_features`` survive, the
    highest-df terms are kept (ties by term).  Feature indices follow
    lexicographic term order.
    """
    if not corpus:
        raise ContractError("cannot fit TF-IDF on an empty corpus")
    if min_df < 1 or max_features < 1:
        raise ContractError("min_df and max_features must be >= 1")
    df = Counter()
    for doc in corpus:
        df.update(set(doc))
    kept = [t for t, n in df.items() if n >= min_df]
    if len(kept) > max_features:
        kept = sorted(kept, key=lambda t: (-df[t], t))[:max_features]
    if not kept:
        raise DegenerateDataError(f"no term reaches min_df={min_df} in {len(corpus)} documents")
    kept.sort()
    doc_freq = np.array([df[t] for t in kept], dtype=np.int64)
    vocab = Vocabulary({t: i for i, t in enumerate(kept)}, doc_freq, len(corpus))
    return TfidfModel(vocab, smoothed_idf(doc_freq, len(corpus)), min_df, max_features)


def transform(model: TfidfModel, doc: Sequence[str]) -> sp.csr_matrix:
    return model.transform(doc)
