import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ensemble_scrub import metrics
from ensemble_scrub.errors import ContractError, UndefinedMetricError


def mann_whitney(scores, y):
    pos = [s for s, t in zip(scores, y) if t]
    neg = [s for s, t in zip(scores, y) if not t]
    total = 0.0
    for p in pos:
        for n in neg:
            total += 1.0 if p > n else 0.5 if p == n else 0.0
    return total / (len(pos) * len(neg))


def naive_macro_f1(t, p, C):
    f1s = []
    for c in range(C):
        tp = sum(1 for a, b in zip(t, p) if a == c and b == c)
        fp = sum(1 for a, b in zip(t, p) if a != c and b == c)
        fn = sum(1 for a, b in zip(t, p) if a == c and b != c)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1s.append(2 * prec * rec / (prec + rec) if prec + rec else 0.0)
    return sum(f1s) / C


def test_confusion_example():
    cm = metrics.confusion([0, 0, 1, 1], [0, 1, 1, 1], 2)
    assert cm.tolist() == [[1, 1], [0, 2]]
    assert metrics.accuracy(cm) == 0.75


def test_confusion_diagonal_and_empty_row():
    cm = metrics.confusion([0, 1, 1], [0, 1, 1], 3)
    assert cm.tolist() == [[1, 0, 0], [0, 2, 0], [0, 0, 0]]
    assert metrics.accuracy(cm) == 1.0


def test_confusion_errors():
    with pytest.raises(ContractError):
        metrics.confusion([0, 1], [0], 2)
    with pytest.raises(ContractError):
        metrics.accuracy(np.zeros((2, 2), dtype=int))


def test_prf_example():
    cm = np.array([[1, 1], [0, 2]])
    s = metrics.prf(cm, 0)
    assert (s.precision, s.recall) == (1.0, 0.5)
    assert s.f1 == pytest.approx(2 / 3, abs=1e-15)
    assert s.specificity == 1.0
    assert s.degenerate == ()


def test_prf_perfect_and_absent_class():
    cm = np.diag([3, 4, 0])
    assert metrics.prf(cm, 0)[:4] == (1.0, 1.0, 1.0, 1.0)
    absent = metrics.prf(cm, 2)
    assert absent[:4] == (0.0, 0.0, 0.0, 1.0)
    assert set(absent.degenerate) == {"precision", "recall", "f1"}


def test_roc_examples():
    y = [1, 1, 0, 0]
    assert metrics.roc_curve([0.9, 0.8, 0.2, 0.1], y).auc == 1.0
    flat = metrics.roc_curve([0.5] * 4, y)
    assert flat.auc == 0.5
    assert flat.fpr.tolist() == [0.0, 1.0] and flat.tpr.tolist() == [0.0, 1.0]


def test_roc_shape():
    c = metrics.roc_curve([0.3, 0.7, 0.7, 0.1, 0.5], [0, 1, 0, 0, 1])
    assert (c.fpr[0], c.tpr[0]) == (0.0, 0.0) and (c.fpr[-1], c.tpr[-1]) == (1.0, 1.0)
    assert np.all(np.diff(c.fpr) >= 0) and np.all(np.diff(c.tpr) >= 0)


def test_roc_single_class_undefined():
    with pytest.raises(UndefinedMetricError):
        metrics.roc_curve([0.1, 0.2], [1, 1])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 20), st.booleans()), min_size=2, max_size=200)
       .filter(lambda v: 0 < sum(b for _, b in v) < len(v)))
def test_auc_equals_mann_whitney_and_reversal(pairs):
    s = [a for a, _ in pairs]
    y = [b for _, b in pairs]
    auc = metrics.roc_curve(s, y).auc
    assert auc == pytest.approx(mann_whitney(s, y), abs=1e-9)
    assert metrics.roc_curve([-v for v in s], y).auc == pytest.approx(1 - auc, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_auc_monotone_invariance(seed):
    rng = np.random.default_rng(seed)
    s = rng.normal(size=80).round(1)
    y = rng.integers(0, 2, size=80)
    y[:2] = [0, 1]
    base = metrics.roc_curve(s, y).auc
    for f in (np.exp, lambda v: 3 * v - 7, lambda v: np.arctan(v) ** 3):
        assert metrics.roc_curve(f(s), y).auc == pytest.approx(base, abs=1e-12)


def test_identities_random():
    rng = np.random.default_rng(0)
    for _ in range(200):
        t = rng.integers(0, 4, size=200)
        p = rng.integers(0, 4, size=200)
        cm = metrics.confusion(t, p, 4)
        assert metrics.accuracy(cm) == np.mean(t == p)
        assert cm.sum(axis=1).tolist() == np.bincount(t, minlength=4).tolist()
        f1 = np.mean([metrics.prf(cm, c).f1 for c in range(4)])
        assert f1 == pytest.approx(naive_macro_f1(t, p, 4), abs=1e-12)


def test_evaluate_report():
    y = np.array([0, 0, 1, 1, 2, 2])
    scores = np.eye(3)[y] * 0.8 + 0.1 / 3
    rep = metrics.evaluate(y, np.argmax(scores, 1), scores, 3)
    assert rep.accuracy == 1.0 and rep.macro_ovr_auc == 1.0
    d = rep.to_dict()
    assert d["confusion_orientation"].startswith("rows=actual")
    assert d["macro_f1"] == 1.0


def test_evaluate_missing_class_auc():
    y = np.array([0, 0, 1, 1])
    scores = np.array([[0.9, 0.1, 0.0]] * 2 + [[0.1, 0.9, 0.0]] * 2)
    rep = metrics.evaluate(y, [0, 0, 1, 1], scores, 3)
    assert rep.auc[2] is None
    assert rep.macro_ovr_auc == 1.0
    assert "auc" in rep.degenerate["2"]


def test_csv_writers(tmp_path):
    cm = np.array([[1, 2], [3, 4]])
    metrics.write_confusion_csv(cm, ["Surgery", "Cardio / Pulm"], tmp_path / "cm.csv")
    lines = (tmp_path / "cm.csv").read_text().splitlines()
    assert lines[0] == "actual \\ predicted,Surgery,Cardio / Pulm"
    assert lines[2] == "Cardio / Pulm,3,4"
    metrics.write_roc_csv(metrics.roc_curve([0.2, 0.8], [0, 1]), tmp_path / "roc.csv")
    assert (tmp_path / "roc.csv").read_text().splitlines()[0] == "threshold,fpr,tpr"
