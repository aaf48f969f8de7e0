"""CSV ingestion, class filtering/balancing, label encoding and train/test splits."""
from __future__ import annotations

import csv
import logging
import math
import sys
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError, DegenerateDataError, InputError, SchemaError

log = logging.getLogger(__name__)

# transcription fields in the medical corpora run well past the csv default of 128 KiB
csv.field_size_limit(min(sys.maxsize, 2**31 - 1))


@dataclass(frozen=True)
class RawRecord:
    record_id: int
    text: str
    label: str


@dataclass(frozen=True)
class LabeledDataset:
    """Ordered ``(record_id, text, class_id)`` triples plus the class-name table."""

    records: tuple[tuple[int, str, int], ...]
    class_names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(tuple(r) for r in self.records))
        object.__setattr__(self, "class_names", tuple(self.class_names))
        if len(set(self.class_names)) != len(self.class_names):
            raise DegenerateDataError("duplicate class names")
        if len(self.class_names) < 2:
            raise DegenerateDataError("a labeled dataset needs at least two classes")
        C = len(self.class_names)
        ids = set()
        for rid, _, cid in self.records:
            if not 0 <= cid < C:
                raise DegenerateDataError(f"class id {cid} outside [0, {C})")
            ids.add(rid)
        if len(ids) != len(self.records):
            raise DegenerateDataError("record ids are not unique")

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def ids(self) -> np.ndarray:
        return np.array([r[0] for r in self.records], dtype=np.int64)

    @property
    def texts(self) -> list[str]:
        return [r[1] for r in self.records]

    @property
    def labels(self) -> np.ndarray:
        return np.array([r[2] for r in self.records], dtype=np.int64)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_classes)

    def take(self, positions: Iterable[int]) -> "LabeledDataset":
        """Sub-dataset at the given row positions (not record ids), same class table."""
        return LabeledDataset(tuple(self.records[i] for i in positions), self.class_names)

    def with_labels(self, labels: Sequence[int]) -> "LabeledDataset":
        if len(labels) != len(self.records):
            raise ValueError("label count does not match record count")
        recs = tuple((rid, text, int(y)) for (rid, text, _), y in zip(self.records, labels))
        return LabeledDataset(recs, self.class_names)

    def decode(self) -> list[RawRecord]:
        return [RawRecord(rid, text, self.class_names[cid]) for rid, text, cid in self.records]


@dataclass(frozen=True)
class BalanceConfig:
    min_class_count: int = 355
    seed: int = 42

    def __post_init__(self):
        if self.min_class_count < 1:
            raise ConfigurationError("min_class_count must be >= 1")


@dataclass(frozen=True)
class SplitPair:
    train: LabeledDataset
    test: LabeledDataset
    test_fraction: float


def load_csv(path, text_col: str, label_col: str) -> list[RawRecord]:
    """Read ``text_col``/``label_col`` pairs, dropping rows where either is empty.

    Labels are whitespace-stripped; text is kept verbatim.  Record ids follow
    post-drop order.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"input file not found: {path}")
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            for col in (text_col, label_col):
                if col not in header:
                    raise SchemaError(f"column {col!r} not found in {path.name} header")
            records = []
            for row in reader:
                text = row.get(text_col)
                label = row.get(label_col)
                if text is None or label is None or not text.strip() or not label.strip():
                    continue
                records.append(RawRecord(len(records), text, label.strip()))
    except UnicodeDecodeError as exc:
        raise InputError(f"{path} is not valid UTF-8: {exc}") from exc
    if not records:
        raise DegenerateDataError(f"no rows with both {text_col!r} and {label_col!r} in {path}")
    log.info("loaded %d records from %s", len(records), path)
    return records


def filter_and_balance(records: Sequence[RawRecord], config: BalanceConfig) -> list[RawRecord]:
    """Drop classes below ``min_class_count``, then downsample the rest to the smallest survivor."""
    if not records:
        raise DegenerateDataError("no records to balance")
    counts = Counter(r.label for r in records)
    kept = sorted(c for c, n in counts.items() if n >= config.min_class_count)
    if len(kept) < 2:
        raise DegenerateDataError(
            f"only {len(kept)} class(es) have >= {config.min_class_count} records"
        )
    m = min(counts[c] for c in kept)
    rng = np.random.default_rng(config.seed)
    chosen = []
    for name in kept:
        positions = [i for i, r in enumerate(records) if r.label == name]
        if len(positions) > m:
            positions = rng.choice(positions, size=m, replace=False).tolist()
        chosen.extend(positions)
    chosen.sort()
    return [records[i] for i in chosen]


def encode_labels(records: Sequence[RawRecord]) -> LabeledDataset:
    """Assign ids by descending class frequency, ties broken by class name."""
    counts = Counter(r.label for r in records)
    if len(counts) < 2:
        raise DegenerateDataError(f"need >= 2 distinct labels, got {len(counts)}")
    names = sorted(counts, key=lambda c: (-counts[c], c))
    index = {name: i for i, name in enumerate(names)}
    return LabeledDataset(tuple((r.record_id, r.text, index[r.label]) for r in records), tuple(names))


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split(dataset: LabeledDataset, test_fraction: float = 0.2, seed: int = 42,
          stratified: bool = False) -> SplitPair:
    """Seeded shuffle-and-partition; both sides keep the parent's record order."""
    n = len(dataset)
    if not 0.0 < test_fraction < 1.0:
        raise ConfigurationError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    n_test = _round_half_up(test_fraction * n)
    if n_test == 0 or n_test == n:
        raise ConfigurationError(
            f"test_fraction={test_fraction} leaves an empty side for N={n}"
        )
    rng = np.random.default_rng(seed)
    if stratified:
        test_pos = _stratified_test_positions(dataset.labels, n_test, rng)
    else:
        test_pos = rng.permutation(n)[:n_test]
    is_test = np.zeros(n, dtype=bool)
    is_test[test_pos] = True
    return SplitPair(
        train=dataset.take(np.flatnonzero(~is_test)),
        test=dataset.take(np.flatnonzero(is_test)),
        test_fraction=test_fraction,
    )


def _stratified_test_positions(labels: np.ndarray, n_test: int, rng) -> np.ndarray:
    # largest-remainder allocation keeps the total at exactly n_test
    classes = np.unique(labels)
    counts = np.array([(labels == c).sum() for c in classes])
    quota = counts * n_test / len(labels)
    alloc = np.floor(quota).astype(int)
    short = n_test - alloc.sum()
    order = np.lexsort((classes, -(quota - alloc)))
    alloc[order[:short]] += 1
    picked = []
    for c, k in zip(classes, alloc):
        pos = np.flatnonzero(labels == c)
        picked.append(rng.permutation(pos)[:k])
    return np.concatenate(picked)


def write_csv(dataset: LabeledDataset, path, text_col: str, label_col: str) -> None:
    """Write records back in the input schema plus a ``source_record_id`` column."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([text_col, label_col, "source_record_id"])
        for rid, text, cid in dataset.records:
            writer.writerow([text, dataset.class_names[cid], rid])
