"""End-to-end orchestration: baseline (BE), ensemble cleaning, re-baseline (AE), noise study."""
from __future__ import annotations

import json
import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.sparse as sp

from . import dataset_io, ensemble_filter, metrics, models, resampler, textprep, vectorizer
from .config import PipelineConfig
from .dataset_io import LabeledDataset
from .ensemble_filter import BiasVector, CleaningReport
from .errors import ConfigurationError, ScrubError
from .models import ModelKind

log = logging.getLogger(__name__)

METRIC_ROWS = (
    ("Accuracy", "accuracy"),
    ("F1-Score", "macro_f1"),
    ("Recall", "macro_recall"),
    ("Precision", "macro_precision"),
    ("ROC Auc", "macro_ovr_auc"),
)
PHASES = ("BE", "AE")


class _Timer(dict):
    @contextmanager
    def stage(self, name):
        t0 = time.perf_counter()
        try:
            yield
        except ScrubError as exc:
            exc.stage = getattr(exc, "stage", name)
            raise
        finally:
            self[name] = self.get(name, 0.0) + time.perf_counter() - t0


# --- data preparation --------------------------------------------------------

def prepare_dataset(config: PipelineConfig, timer: Optional[_Timer] = None):
    """load -> filter_and_balance -> encode.  Returns ``(dataset, size_ledger)``."""
    timer = timer if timer is not None else _Timer()
    if not config.input:
        raise ConfigurationError("no --input given")
    with timer.stage("load"):
        raw = dataset_io.load_csv(config.input, config.text_col, config.label_col)
    with timer.stage("balance"):
        balanced = dataset_io.filter_and_balance(
            raw, dataset_io.BalanceConfig(config.min_class_count, config.seed)
        )
        dataset = dataset_io.encode_labels(balanced)
    log.info("raw %d -> balanced %d records (%d classes)", len(raw), len(dataset), dataset.num_classes)
    return dataset, {"raw": len(raw), "balanced": len(dataset)}


def token_config(config: PipelineConfig) -> textprep.TokenPipelineConfig:
    return textprep.TokenPipelineConfig(
        stemming_enabled=config.stemming, strip_markup=config.strip_markup
    )


def tokenize(dataset: LabeledDataset, config: PipelineConfig) -> dict[int, list[str]]:
    tc = token_config(config)
    return {rid: textprep.normalize(text, tc) for rid, text, _ in dataset.records}


# --- one train/evaluate phase ------------------------------------------------

@dataclass
class PhaseResult:
    """Everything one split -> TF-IDF -> SMOTE -> fit -> evaluate pass produces."""

    split: dataset_io.SplitPair
    tfidf: vectorizer.TfidfModel
    models: list
    metrics: dict  # ModelKind -> MetricsReport
    train_size_after_smote: int


def _features(tfidf, dataset: LabeledDataset, tokens: dict) -> sp.csr_matrix:
    return tfidf.transform_many([tokens[rid] for rid in dataset.ids.tolist()])


def fit_models(train: LabeledDataset, tokens: dict, config: PipelineConfig, timer: _Timer):
    """TF-IDF on ``train`` -> SMOTE -> fit all six.  Returns ``(tfidf, models, n_train)``."""
    with timer.stage("vectorize"):
        tfidf = vectorizer.fit([tokens[rid] for rid in train.ids.tolist()],
                               config.min_df, config.max_features)
        X_train = _features(tfidf, train, tokens)
    with timer.stage("smote"):
        X_res, y_res = resampler.oversample(
            X_train, train.labels, resampler.SmoteConfig(config.smote_k, config.seed)
        )
    fitted = []
    for kind in ModelKind:
        with timer.stage(f"fit_{kind.name}"):
            fitted.append(models.fit(kind, X_res, y_res, config.hp, train.num_classes))
    return tfidf, fitted, X_res.shape[0]


def run_phase(dataset: LabeledDataset, tokens: dict, config: PipelineConfig,
              timer: Optional[_Timer] = None) -> PhaseResult:
    timer = timer if timer is not None else _Timer()
    with timer.stage("split"):
        pair = dataset_io.split(dataset, config.test_fraction, config.seed, config.stratified)
    tfidf, fitted, n_res = fit_models(pair.train, tokens, config, timer)
    X_test = _features(tfidf, pair.test, tokens)
    y_test = pair.test.labels
    reports = {}
    for model in fitted:
        with timer.stage(f"evaluate_{model.kind.name}"):
            scores = model.predict_scores(X_test)
            pred = np.argmax(scores, axis=1)
            reports[model.kind] = metrics.evaluate(y_test, pred, scores, dataset.num_classes)
    return PhaseResult(pair, tfidf, fitted, reports, n_res)


# --- public stages -----------------------------------------------------------

@dataclass
class BaselineResult:
    dataset: LabeledDataset
    tokens: dict
    phase: PhaseResult
    ledger: dict
    timings: dict = field(default_factory=dict)

    @property
    def models(self):
        return self.phase.models

    @property
    def tfidf(self):
        return self.phase.tfidf

    @property
    def metrics(self):
        return self.phase.metrics


def run_baseline(config: PipelineConfig, dataset: Optional[LabeledDataset] = None) -> BaselineResult:
    """Steps A-B: prepare, normalize, split, TF-IDF, SMOTE, fit six models, evaluate on test.

    An in-memory ``dataset`` skips CSV loading and class balancing.
    """
    timer = _Timer()
    if dataset is None:
        dataset, ledger = prepare_dataset(config, timer)
    else:
        ledger = {"raw": len(dataset), "balanced": len(dataset)}
    with timer.stage("normalize"):
        tokens = tokenize(dataset, config)
    phase = run_phase(dataset, tokens, config, timer)
    return BaselineResult(dataset, tokens, phase, ledger, timer)


def resolve_bias(config: PipelineConfig, baseline: BaselineResult) -> BiasVector:
    if config.bias_mode == "ranked":
        acc = [baseline.metrics[k].accuracy for k in ModelKind]
        return ensemble_filter.derive_bias(acc)
    return config.bias_vector


def out_of_fold_predictions(dataset: LabeledDataset, tokens: dict, config: PipelineConfig,
                            timer: _Timer) -> np.ndarray:
    """(n, 6) votes where each record is predicted only by models that never trained on it."""
    n = len(dataset)
    k = config.oof_folds
    if k > n:
        raise ConfigurationError(f"oof_folds={k} exceeds {n} records")
    fold = np.empty(n, dtype=np.int64)
    fold[np.random.default_rng(config.seed).permutation(n)] = np.arange(n) % k
    votes = np.zeros((n, len(ModelKind)), dtype=np.int64)
    for f in range(k):
        held = np.flatnonzero(fold == f)
        train = dataset.take(np.flatnonzero(fold != f))
        tfidf, fitted, _ = fit_models(train, tokens, config, timer)
        X_held = _features(tfidf, dataset.take(held), tokens)
        votes[held] = ensemble_filter.collect_predictions(fitted, X_held)
    return votes


def run_clean(config: PipelineConfig, baseline: BaselineResult):
    """Step C: vote over the whole balanced dataset and drop label/verdict disagreements."""
    timer = _Timer()
    dataset = baseline.dataset
    bias = resolve_bias(config, baseline)
    with timer.stage("ensemble"):
        if config.oof:
            votes = out_of_fold_predictions(dataset, baseline.tokens, config, timer)
        else:
            X_full = _features(baseline.tfidf, dataset, baseline.tokens)
            votes = ensemble_filter.collect_predictions(baseline.models, X_full)
        verdict, tallies = ensemble_filter.ensemble_predict(votes, bias, dataset.num_classes)
    with timer.stage("filter"):
        improved, report = ensemble_filter.filter_dataset(dataset, verdict, votes, tallies, bias)
    baseline.timings.update({f"clean_{k}": v for k, v in timer.items()})
    log.info("kept %d of %d records", len(improved), len(dataset))
    return improved, report


@dataclass
class RunReport:
    config: PipelineConfig
    ledger: dict
    be: dict
    ae: dict
    cleaning: CleaningReport
    class_names: tuple
    timings: dict = field(default_factory=dict)

    def table(self) -> dict:
        """metric -> model -> phase -> value, the BE/AE layout."""
        out = {}
        for title, attr in METRIC_ROWS:
            out[title] = {
                k.label: {ph: getattr(rep[k], attr) for ph, rep in zip(PHASES, (self.be, self.ae))}
                for k in ModelKind
            }
        return out

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "class_names": list(self.class_names),
            "ledger": self.ledger,
            "notes": {
                "be_ae_test_sets": "BE and AE are measured on different test splits; "
                                   "AE uses a fresh split of the cleaned dataset",
                "ae_confusion_source": "test split of the cleaned dataset",
                "confusion_orientation": "rows=actual, columns=predicted",
                "averaging": "macro (unweighted) over classes; AUC is macro one-vs-rest",
            },
            "bias": list(self.cleaning.bias.weights),
            "table": self.table(),
            "be": {k.name: self.be[k].to_dict() for k in ModelKind},
            "ae": {k.name: self.ae[k].to_dict() for k in ModelKind},
            "cleaning": self.cleaning.to_dict(),
        }


def run_evaluate(config: PipelineConfig, dataset: Optional[LabeledDataset] = None,
                 write: bool = True) -> RunReport:
    """Steps A-D: baseline, clean, then repeat steps A-B on the improved dataset."""
    baseline = run_baseline(config, dataset)
    improved, cleaning = run_clean(config, baseline)
    timer = _Timer()
    ae_phase = run_phase(improved, baseline.tokens, config, timer)
    ledger = dict(baseline.ledger, improved=len(improved))
    timings = dict(baseline.timings)
    timings.update({f"ae_{k}": v for k, v in timer.items()})
    report = RunReport(config, ledger, baseline.metrics, ae_phase.metrics, cleaning,
                       baseline.dataset.class_names, timings)
    if write:
        out = Path(config.out_dir)
        write_run_outputs(report, out)
        dataset_io.write_csv(improved, out / "improved.csv", config.text_col, config.label_col)
        cleaning.write_removed_csv(out / "removed.csv")
    return report


# --- noise harness -----------------------------------------------------------

@dataclass(frozen=True)
class NoiseMask:
    flipped: np.ndarray
    original_labels: np.ndarray
    rate: float

    @property
    def flipped_ids(self):
        return np.flatnonzero(self.flipped)


def inject_noise(dataset: LabeledDataset, rate: float, seed: int = 42):
    """Relabel a seeded ``round(rate*N)`` subset to a uniformly chosen *different* class."""
    if not 0.0 <= rate < 1.0:
        raise ConfigurationError(f"noise rate must lie in [0, 1), got {rate}")
    n, C = len(dataset), dataset.num_classes
    labels = dataset.labels
    rng = np.random.default_rng(seed)
    n_flip = dataset_io._round_half_up(rate * n)
    pos = np.sort(rng.choice(n, size=n_flip, replace=False))
    noisy = labels.copy()
    noisy[pos] = (labels[pos] + rng.integers(1, C, size=n_flip)) % C
    flipped = np.zeros(n, dtype=bool)
    flipped[pos] = True
    return dataset.with_labels(noisy), NoiseMask(flipped, labels, rate)


_CONSONANTS = "bcdfghjklmnpqrtvwxz"


def synthetic_token(index: int, width: int = 4) -> str:
    """Vowel-free, s/y-free letter code; such words pass through normalization unchanged."""
    base = len(_CONSONANTS)
    chars = []
    for _ in range(width):
        index, r = divmod(index, base)
        chars.append(_CONSONANTS[r])
    if index:
        raise ValueError("token index exceeds the code width")
    return "".join(reversed(chars))


def generate_synthetic_corpus(classes: int = 4, docs_per_class: int = 500, class_vocab: int = 50,
                              shared_vocab: int = 200, doc_len: int = 30,
                              noise_word_fraction: float = 0.3, seed: int = 42) -> LabeledDataset:
    """Balanced corpus where each class owns a disjoint vocabulary plus a shared pool.

    Each document has ``doc_len`` tokens: ``round(noise_word_fraction*doc_len)``
    from the shared pool, the rest from its class vocabulary, shuffled.
    """
    for name, v in dict(classes=classes, docs_per_class=docs_per_class, class_vocab=class_vocab,
                        shared_vocab=shared_vocab, doc_len=doc_len).items():
        if v < 1:
            raise ConfigurationError(f"{name} must be >= 1")
    if not 0.0 <= noise_word_fraction < 1.0:
        raise ConfigurationError("noise_word_fraction must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    width = 4
    while len(_CONSONANTS) ** width < classes * class_vocab + shared_vocab:
        width += 1
    vocab = [synthetic_token(i, width) for i in range(classes * class_vocab + shared_vocab)]
    shared = vocab[classes * class_vocab:]
    n_shared = dataset_io._round_half_up(noise_word_fraction * doc_len)
    records = []
    for c in range(classes):
        own = vocab[c * class_vocab:(c + 1) * class_vocab]
        for _ in range(docs_per_class):
            words = [own[i] for i in rng.integers(0, class_vocab, size=doc_len - n_shared)]
            words += [shared[i] for i in rng.integers(0, shared_vocab, size=n_shared)]
            rng.shuffle(words)
            records.append((len(records), " ".join(words), c))
    return LabeledDataset(tuple(records), tuple(f"class_{c}" for c in range(classes)))


def noise_study_summary(mask: NoiseMask, report: CleaningReport) -> dict:
    removed = np.zeros(len(mask.flipped), dtype=bool)
    id_pos = {int(rid): i for i, rid in enumerate(report.record_ids)}
    for rid in report.removed_ids:
        removed[id_pos[rid]] = True
    n_flip = int(mask.flipped.sum())
    n_clean = int((~mask.flipped).sum())
    return {
        "noise_rate": mask.rate,
        "n_flipped": n_flip,
        "n_clean": n_clean,
        "flipped_removed": int((removed & mask.flipped).sum()),
        "clean_retained": int((~removed & ~mask.flipped).sum()),
        "flipped_removed_fraction": float((removed & mask.flipped).sum() / n_flip) if n_flip else None,
        "clean_retained_fraction": float((~removed & ~mask.flipped).sum() / n_clean) if n_clean else None,
    }


def run_noise_study(config: PipelineConfig, write: bool = True):
    """synth -> inject noise -> evaluate.  Returns ``(RunReport, summary dict)``."""
    s = config.synth
    clean = generate_synthetic_corpus(s.classes, s.docs_per_class, s.class_vocab, s.shared_vocab,
                                      s.doc_len, s.noise_word_fraction, config.seed)
    noisy, mask = inject_noise(clean, config.noise_rate, config.seed)
    report = run_evaluate(config, noisy, write=write)
    summary = noise_study_summary(mask, report.cleaning)
    be = np.array([report.be[k].accuracy for k in ModelKind])
    ae = np.array([report.ae[k].accuracy for k in ModelKind])
    summary["accuracy_delta_points"] = {k.name: float(100 * (a - b)) for k, a, b in zip(ModelKind, ae, be)}
    summary["mean_accuracy_delta_points"] = float(100 * np.mean(ae - be))
    if write:
        out = Path(config.out_dir)
        dataset_io.write_csv(noisy, out / "noisy.csv", config.text_col, config.label_col)
        write_noise_mask(mask, noisy, out / "noise_mask.csv")
        _write_json(summary, out / "noise_study.json")
    return report, summary


def write_noise_mask(mask: NoiseMask, noisy: LabeledDataset, path) -> None:
    import csv

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["record_id", "flipped", "original_label", "stored_label"])
        for (rid, _, cid), flip, orig in zip(noisy.records, mask.flipped, mask.original_labels):
            w.writerow([rid, int(flip), noisy.class_names[orig], noisy.class_names[cid]])


# --- report writers ----------------------------------------------------------

def _write_json(payload, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_phase_artifacts(reports: dict, class_names, phase: str, out: Path) -> None:
    tag = phase.lower()
    for kind, rep in reports.items():
        name = kind.name.lower()
        metrics.write_confusion_csv(rep.confusion, class_names, out / f"cm_{name}_{tag}.csv")
        for c, curve in enumerate(rep.roc):
            if curve is not None:
                metrics.write_roc_csv(curve, out / f"roc_{name}_{c}_{tag}.csv")


def _pct(v) -> str:
    return "n/a" if v is None else f"{100 * v:.1f}"


def summary_markdown(report: RunReport) -> str:
    kinds = list(ModelKind)
    lines = [
        "# Before / after ensemble cleaning",
        "",
        "Results in percent. BE = before ensemble, AE = after ensemble.",
        "BE and AE are measured on different test splits (AE uses a fresh split of the cleaned data).",
        "",
        "| Metrics | " + " | ".join(f"{k.label} BE | {k.label} AE" for k in kinds) + " |",
        "|---|" + "---|---|" * len(kinds),
    ]
    for title, attr in METRIC_ROWS:
        cells = []
        for k in kinds:
            cells += [_pct(getattr(report.be[k], attr)), _pct(getattr(report.ae[k], attr))]
        lines.append(f"| {title} | " + " | ".join(cells) + " |")
    led = report.ledger
    lines += [
        "",
        f"Records: raw {led['raw']} -> balanced {led['balanced']} -> improved {led['improved']} "
        f"({len(report.cleaning.removed_ids)} removed, agreement {100 * report.cleaning.agreement_rate:.1f}%).",
        f"Bias vector ({', '.join(k.name for k in kinds)}): {list(report.cleaning.bias.weights)}",
        "Confusion matrices: rows = actual class, columns = predicted class.",
        "",
    ]
    return "\n".join(lines)


def write_run_outputs(report: RunReport, out: Path) -> None:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(report.to_dict(), out / "report.json")
    _write_json({k: round(v, 6) for k, v in sorted(report.timings.items())}, out / "timings.json")
    (out / "summary.md").write_text(summary_markdown(report), encoding="utf-8")
    write_phase_artifacts(report.be, report.class_names, "BE", out)
    write_phase_artifacts(report.ae, report.class_names, "AE", out)
