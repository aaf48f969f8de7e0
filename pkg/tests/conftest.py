import csv

import numpy as np
import pytest

from ensemble_scrub import vectorizer
from ensemble_scrub.dataset_io import LabeledDataset


def write_rows(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


@pytest.fixture
def separable_toy():
    """10 'alpha' documents of class 0, 10 'beta' documents of class 1."""
    docs = [["alpha"]] * 10 + [["beta"]] * 10
    y = np.array([0] * 10 + [1] * 10)
    model = vectorizer.fit(docs, min_df=1)
    return model, model.transform_many(docs), y


@pytest.fixture
def tiny_dataset():
    recs = [(i, f"doc {i}", i % 3) for i in range(12)]
    return LabeledDataset(tuple(recs), ("a", "b", "c"))


ACCEPTANCE_LINES: dict = {}


def record_acceptance(key: str, ok, detail: str = "") -> None:
    """Store and print a one-line verdict for an acceptance criterion."""
    status = ok if isinstance(ok, str) else ("PASS" if ok else "FAIL")
    line = f"{key}: {status}" + (f"  ({detail})" if detail else "")
    ACCEPTANCE_LINES[key] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
