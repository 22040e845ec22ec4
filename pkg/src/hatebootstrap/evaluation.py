"""Sampling-based precision/recall estimation and annotation file handling.

Precision comes from annotating a random sample of system-tagged documents;
recall normalizes precision * tagged_count by the assumed number of truly
hateful documents (base_rate * corpus_size). An exact-mode evaluator against
a known ground truth is provided for synthetic corpora.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .corpus import Corpus

DEFAULT_BASE_RATE = 0.006


@dataclass
class EvalReport:
    precision: float
    recall_estimate: float
    f1: float
    tagged_count: int
    estimated_hateful: float
    corpus_size: int
    base_rate: float
    sample_size: int
    recall_capped: bool = False


def _f1(precision: float, recall: float) -> float:
    if precision + recall <= 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def draw_sample(tagged: Iterable[str], k: int = 1000, seed: int = 0) -> list[str]:
    """Uniform sample without replacement from the tagged ids, deterministic
    in the seed. When fewer than k ids exist, all are returned (permuted)."""
    ids = sorted(tagged)
    if not ids:
        raise ValueError("tagged set is empty")
    rng = np.random.Generator(np.random.PCG64(seed))
    take = min(k, len(ids))
    picked = rng.choice(len(ids), size=take, replace=False)
    return [ids[int(i)] for i in picked]


def estimate(n_hateful_in_sample: int, k: int, n_tagged: int, corpus_size: int,
             base_rate: float = DEFAULT_BASE_RATE) -> EvalReport:
    """Estimate precision, recall, and F1 from an annotated sample.

    precision = n/k; estimated_hateful = precision * n_tagged; recall is
    estimated_hateful normalized by base_rate * corpus_size and capped at
    1.0 (flagged when the cap binds).
    """
    if not (0 <= n_hateful_in_sample <= k):
        raise ValueError("need 0 <= n <= k")
    if k <= 0:
        raise ValueError("sample size must be positive")
    total_hateful = base_rate * corpus_size
    if total_hateful <= 0.0:
        raise ValueError("base_rate * corpus_size must be positive")
    precision = n_hateful_in_sample / k
    estimated_hateful = precision * n_tagged
    recall = estimated_hateful / total_hateful
    capped = recall > 1.0
    if capped:
        recall = 1.0
    return EvalReport(
        precision=precision,
        recall_estimate=recall,
        f1=_f1(precision, recall),
        tagged_count=n_tagged,
        estimated_hateful=estimated_hateful,
        corpus_size=corpus_size,
        base_rate=base_rate,
        sample_size=k,
        recall_capped=capped,
    )


def exact_report(predicted: Iterable[str], truth_hateful: Iterable[str]) -> EvalReport:
    """Exact precision/recall/F1 against a known ground truth labeling.

    Only meaningful on synthetic corpora where every true label is known;
    the sampling estimator above is the production path.
    """
    pred = set(predicted)
    truth = set(truth_hateful)
    if not truth:
        raise ValueError("ground truth contains no hateful documents")
    tp = len(pred & truth)
    precision = tp / len(pred) if pred else 0.0
    recall = tp / len(truth)
    return EvalReport(
        precision=precision,
        recall_estimate=recall,
        f1=_f1(precision, recall),
        tagged_count=len(pred),
        estimated_hateful=float(tp),
        corpus_size=0,
        base_rate=0.0,
        sample_size=len(pred),
    )


def export_annotation_csv(sample: Sequence[str], corpus: Corpus, path: str) -> None:
    """Write ``id,text,label`` rows for human annotation (label left empty)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "text", "label"])
        for doc_id in sample:
            doc = corpus.get(doc_id)
            text = doc.raw_text if doc is not None else ""
            writer.writerow([doc_id, text, ""])


def import_annotation_csv(path: str,
                          expected_ids: Optional[Iterable[str]] = None) -> dict[str, int]:
    """Read back annotated rows as ``{id: label}`` with label in {0, 1}.

    When ``expected_ids`` is given, any id outside the exported sample is an
    error; bad labels and duplicate ids raise with the offending line number.
    """
    expected = set(expected_ids) if expected_ids is not None else None
    labels: dict[str, int] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]] != ["id", "text", "label"]:
            raise ValueError("line 1: expected header id,text,label")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 3:
                raise ValueError(f"line {lineno}: expected 3 columns")
            doc_id, _, label_str = row[0], row[1], row[2].strip()
            if label_str not in ("0", "1"):
                raise ValueError(f"line {lineno}: label must be 0 or 1, got {label_str!r}")
            if expected is not None and doc_id not in expected:
                raise ValueError(f"line {lineno}: unknown id {doc_id!r}")
            if doc_id in labels:
                raise ValueError(f"line {lineno}: duplicate id {doc_id!r}")
            labels[doc_id] = int(label_str)
    return labels


def count_positive(labels: Mapping[str, int]) -> int:
    return sum(1 for v in labels.values() if v == 1)
