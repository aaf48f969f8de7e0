"""Bias-weighted voting over the six baseline models and label-disagreement filtering."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset_io import LabeledDataset
from .errors import ConfigurationError, ContractError, DegenerateCleaningError
from .models import ModelKind, TrainedModel

N_MODELS = len(ModelKind)
DEFAULT_BIAS = (1.0, 1.3, 0.7, 0.9, 1.1, 1.2)
RANK_WEIGHTS = (0.7, 0.9, 1.0, 1.1, 1.2, 1.3)
# tallies closer than this count as tied; bias sums like 1.0+1.3 vs 1.1+1.2 differ only by rounding
TIE_TOL = 1e-9


@dataclass(frozen=True)
class BiasVector:
    weights: tuple[float, ...] = DEFAULT_BIAS

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        object.__setattr__(self, "weights", w)
        if len(w) != N_MODELS:
            raise ConfigurationError(f"bias vector needs {N_MODELS} weights, got {len(w)}")
        if not all(np.isfinite(v) and v > 0 for v in w):
            raise ConfigurationError(f"bias weights must be positive and finite: {w}")

    def as_array(self) -> np.ndarray:
        return np.array(self.weights)


def collect_predictions(models: Sequence[TrainedModel], X_full) -> np.ndarray:
    """``(n, 6)`` matrix whose column m holds the predictions of the ModelKind-m model."""
    if len(models) != N_MODELS or [m.kind for m in models] != list(ModelKind):
        raise ContractError("need exactly one trained model per ModelKind, in ModelKind order")
    shapes = {(m.num_classes, m.num_features) for m in models}
    if len(shapes) != 1:
        raise ContractError(f"models disagree on (classes, features): {sorted(shapes)}")
    n = X_full.shape[0]
    if n == 0:
        return np.zeros((0, N_MODELS), dtype=np.int64)
    return np.column_stack([m.predict(X_full) for m in models]).astype(np.int64)


def _argmax_low(tally: np.ndarray) -> np.ndarray:
    top = tally.max(axis=-1, keepdims=True)
    return np.argmax(tally >= top - TIE_TOL, axis=-1)


def vote_tallies(predictions: np.ndarray, bias: BiasVector, num_classes: int) -> np.ndarray:
    """Per-record class tallies: each model adds its bias weight to the class it predicted."""
    predictions = np.asarray(predictions, dtype=np.int64)
    n = predictions.shape[0]
    tally = np.zeros((n, num_classes))
    w = bias.as_array()
    for m in range(N_MODELS):
        np.add.at(tally, (np.arange(n), predictions[:, m]), w[m])
    return tally


def weighted_vote(row: Sequence[int], bias: BiasVector = BiasVector(), num_classes: int = 4) -> int:
    """Winner of one record's weighted vote; tallies tied within TIE_TOL go to the lowest class id."""
    if num_classes < 2:
        raise ContractError("num_classes must be >= 2")
    if len(row) != N_MODELS or not all(0 <= v < num_classes for v in row):
        raise ContractError(f"vote row must hold {N_MODELS} class ids in [0, {num_classes})")
    tally = np.zeros(num_classes)
    for m, cls in enumerate(row):
        tally[cls] += bias.weights[m]
    return int(_argmax_low(tally))


def ensemble_predict(predictions: np.ndarray, bias: BiasVector, num_classes: int):
    """Vectorized weighted vote; returns ``(verdicts, tallies)``."""
    tally = vote_tallies(predictions, bias, num_classes)
    if tally.shape[0] == 0:
        return np.zeros(0, dtype=np.int64), tally
    return _argmax_low(tally).astype(np.int64), tally


def derive_bias(baseline_accuracies: Sequence[float]) -> BiasVector:
    """Rank models by accuracy (ties by ModelKind order) and hand out 0.7 ... 1.3 worst to best."""
    acc = [float(a) for a in baseline_accuracies]
    if len(acc) != N_MODELS or not all(np.isfinite(acc)):
        raise ConfigurationError(f"need {N_MODELS} finite accuracies")
    ranking = sorted(range(N_MODELS), key=lambda m: (acc[m], m))
    weights = [0.0] * N_MODELS
    for rank, m in enumerate(ranking):
        weights[m] = RANK_WEIGHTS[rank]
    return BiasVector(tuple(weights))


@dataclass(frozen=True)
class CleaningReport:
    record_ids: np.ndarray
    labels: np.ndarray
    ensemble_prediction: np.ndarray
    tallies: np.ndarray
    votes: np.ndarray
    kept_ids: tuple[int, ...]
    removed_ids: tuple[int, ...]
    class_names: tuple[str, ...]
    bias: BiasVector

    @property
    def agreement_rate(self) -> float:
        n = len(self.record_ids)
        return len(self.kept_ids) / n if n else 1.0

    def to_dict(self) -> dict:
        return {
            "class_names": list(self.class_names),
            "bias": list(self.bias.weights),
            "model_order": [k.name for k in ModelKind],
            "n_records": int(len(self.record_ids)),
            "n_kept": len(self.kept_ids),
            "n_removed": len(self.removed_ids),
            "agreement_rate": self.agreement_rate,
            "kept_ids": [int(i) for i in self.kept_ids],
            "removed_ids": [int(i) for i in self.removed_ids],
            "records": [
                {
                    "record_id": int(rid),
                    "label": int(lab),
                    "ensemble_prediction": int(pred),
                    "votes": [int(v) for v in votes],
                    "tally": [round(float(t), 12) for t in tally],
                }
                for rid, lab, pred, votes, tally in zip(
                    self.record_ids, self.labels, self.ensemble_prediction, self.votes, self.tallies
                )
            ],
        }

    def write_removed_csv(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        removed = set(self.removed_ids)
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["record_id", "label", "ensemble_prediction"] + [f"vote_{k.name}" for k in ModelKind])
            for rid, lab, pred, votes in zip(self.record_ids, self.labels, self.ensemble_prediction, self.votes):
                if int(rid) in removed:
                    w.writerow([int(rid), self.class_names[lab], self.class_names[pred]]
                               + [self.class_names[v] for v in votes])


def filter_dataset(dataset: LabeledDataset, ensemble_prediction, votes=None, tallies=None,
                   bias: BiasVector = BiasVector()):
    """Keep the records whose label equals the ensemble verdict.

    Returns ``(improved, report)``.  Raises :class:`DegenerateCleaningError`
    (carrying the report) if any class disappears.
    """
    pred = np.asarray(ensemble_prediction, dtype=np.int64)
    n = len(dataset)
    if pred.shape != (n,):
        raise ContractError(f"{pred.shape[0]} predictions for {n} records")
    labels = dataset.labels
    keep = pred == labels
    ids = dataset.ids
    if votes is None:
        votes = np.zeros((n, 0), dtype=np.int64)
    if tallies is None:
        tallies = np.zeros((n, 0))
    report = CleaningReport(
        record_ids=ids,
        labels=labels,
        ensemble_prediction=pred,
        tallies=np.asarray(tallies),
        votes=np.asarray(votes),
        kept_ids=tuple(int(i) for i in ids[keep]),
        removed_ids=tuple(int(i) for i in ids[~keep]),
        class_names=dataset.class_names,
        bias=bias,
    )
    surviving = np.bincount(labels[keep], minlength=dataset.num_classes)
    lost = [dataset.class_names[c] for c in np.flatnonzero(surviving == 0)]
    if lost:
        raise DegenerateCleaningError(f"cleaning removed every record of {lost}", report)
    return dataset.take(np.flatnonzero(keep)), report


def clean(dataset: LabeledDataset, models: Sequence[TrainedModel], X_full,
          bias: BiasVector = BiasVector()):
    """collect_predictions -> weighted vote -> filter_dataset in one call."""
    votes = collect_predictions(models, X_full)
    verdict, tallies = ensemble_predict(votes, bias, dataset.num_classes)
    return filter_dataset(dataset, verdict, votes, tallies, bias)
