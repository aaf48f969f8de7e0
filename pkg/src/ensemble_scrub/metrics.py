"""Confusion matrix, accuracy, per-class precision/recall/F1/specificity and one-vs-rest ROC."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import ContractError, UndefinedMetricError


def confusion(y_true, y_pred, num_classes: int) -> np.ndarray:
    """C x C counts; rows are the actual class, columns the predicted class."""
    t = np.asarray(y_true, dtype=np.int64)
    p = np.asarray(y_pred, dtype=np.int64)
    if t.shape != p.shape:
        raise ContractError(f"y_true has {t.size} entries, y_pred {p.size}")
    if t.size and (min(t.min(), p.min()) < 0 or max(t.max(), p.max()) >= num_classes):
        raise ContractError(f"class ids must lie in [0, {num_classes})")
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(cm, (t, p), 1)
    return cm


def accuracy(cm: np.ndarray) -> float:
    total = cm.sum()
    if total == 0:
        raise ContractError("accuracy of an empty confusion matrix")
    return float(np.trace(cm) / total)


class ClassScores(NamedTuple):
    precision: float
    recall: float
    f1: float
    specificity: float
    degenerate: tuple  # names of the metrics that hit 0/0


def _ratio(num, den, name, flags):
    if den == 0:
        flags.append(name)
        return 0.0
    return float(num / den)


def prf(cm: np.ndarray, c: int) -> ClassScores:
    """One-vs-rest precision, recall, F1 and specificity for class ``c``; 0/0 gives 0 and a flag."""
    if not 0 <= c < cm.shape[0]:
        raise ContractError(f"class {c} out of range")
    tp = cm[c, c]
    fp = cm[:, c].sum() - tp
    fn = cm[c, :].sum() - tp
    tn = cm.sum() - tp - fp - fn
    flags: list[str] = []
    precision = _ratio(tp, tp + fp, "precision", flags)
    recall = _ratio(tp, tp + fn, "recall", flags)
    f1 = _ratio(2 * precision * recall, precision + recall, "f1", flags)
    specificity = _ratio(tn, tn + fp, "specificity", flags)
    return ClassScores(precision, recall, f1, specificity, tuple(flags))


@dataclass(frozen=True)
class RocCurve:
    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float


def roc_curve(scores, y_true_binary) -> RocCurve:
    """ROC points swept over distinct score values (ties form one step); AUC by trapezoid."""
    s = np.asarray(scores, dtype=float)
    yb = np.asarray(y_true_binary).astype(bool)
    if s.shape != yb.shape:
        raise ContractError("scores and labels differ in length")
    n_pos = int(yb.sum())
    n_neg = yb.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("ROC needs at least one positive and one negative")
    order = np.argsort(-s, kind="stable")
    s, yb = s[order], yb[order]
    # last index of each run of equal scores
    ends = np.r_[np.flatnonzero(np.diff(s) != 0), s.size - 1]
    tp = np.cumsum(yb)[ends]
    fp = (ends + 1) - tp
    tpr = np.r_[0.0, tp / n_pos]
    fpr = np.r_[0.0, fp / n_neg]
    thresholds = np.r_[np.inf, s[ends]]
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    return RocCurve(thresholds, fpr, tpr, auc)


@dataclass
class MetricsReport:
    accuracy: float
    precision: list[float]
    recall: list[float]
    f1: list[float]
    specificity: list[float]
    auc: list[Optional[float]]
    confusion: np.ndarray
    degenerate: dict = field(default_factory=dict)
    roc: list = field(default_factory=list, repr=False)

    @property
    def macro_precision(self) -> float:
        return float(np.mean(self.precision))

    @property
    def macro_recall(self) -> float:
        return float(np.mean(self.recall))

    @property
    def macro_f1(self) -> float:
        return float(np.mean(self.f1))

    @property
    def macro_specificity(self) -> float:
        return float(np.mean(self.specificity))

    @property
    def macro_ovr_auc(self) -> Optional[float]:
        defined = [a for a in self.auc if a is not None]
        return float(np.mean(defined)) if defined else None

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "macro_specificity": self.macro_specificity,
            "macro_ovr_auc": self.macro_ovr_auc,
            "per_class": {
                "precision": self.precision,
                "recall": self.recall,
                "f1": self.f1,
                "specificity": self.specificity,
                "auc": self.auc,
            },
            "confusion": self.confusion.tolist(),
            "confusion_orientation": "rows=actual, columns=predicted",
            "degenerate": self.degenerate,
        }


def evaluate(y_true, y_pred, scores: np.ndarray, num_classes: int) -> MetricsReport:
    """Full metric suite with macro averaging and macro one-vs-rest AUC over ``scores`` columns."""
    y_true = np.asarray(y_true, dtype=np.int64)
    cm = confusion(y_true, y_pred, num_classes)
    per = [prf(cm, c) for c in range(num_classes)]
    aucs, rocs, degenerate = [], [], {}
    for c in range(num_classes):
        if per[c].degenerate:
            degenerate[str(c)] = list(per[c].degenerate)
        try:
            curve = roc_curve(scores[:, c], y_true == c)
        except UndefinedMetricError:
            degenerate.setdefault(str(c), []).append("auc")
            aucs.append(None)
            rocs.append(None)
            continue
        aucs.append(curve.auc)
        rocs.append(curve)
    return MetricsReport(
        accuracy=accuracy(cm),
        precision=[p.precision for p in per],
        recall=[p.recall for p in per],
        f1=[p.f1 for p in per],
        specificity=[p.specificity for p in per],
        auc=aucs,
        confusion=cm,
        degenerate=degenerate,
        roc=rocs,
    )


def write_confusion_csv(cm: np.ndarray, class_names: Sequence[str], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["actual \\ predicted"] + list(class_names))
        for name, row in zip(class_names, cm):
            w.writerow([name] + [int(v) for v in row])


def write_roc_csv(curve: RocCurve, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["threshold", "fpr", "tpr"])
        for thr, f, t in zip(curve.thresholds, curve.fpr, curve.tpr):
            w.writerow([repr(float(thr)), repr(float(f)), repr(float(t))])
