"""Post-hoc analyses over a labeled pool: daily volume and top mentions/hashtags."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from typing import Optional

from .corpus import Corpus
from .pool import LabelPool

TIMEZONES = {
    "utc": timezone.utc,
    "est": timezone(timedelta(hours=-5)),  # fixed-offset Eastern, no DST
}


@dataclass
class TemporalHistogram:
    buckets: list[tuple[date, int, int, float]]  # (day, hateful, total, ratio)
    skipped_no_timestamp: int
    timezone_name: str


def _bucket_day(ts: int, tz: timezone) -> date:
    return datetime.fromtimestamp(ts, tz=tz).date()


def temporal_distribution(pool: LabelPool, corpus: Corpus,
                          tz_name: str = "utc") -> TemporalHistogram:
    """Daily hateful/total counts and ratio over the corpus date span.

    Buckets cover the span contiguously (zero-filled days included).
    Documents without timestamps are skipped and counted.
    """
    tz = TIMEZONES.get(tz_name.lower())
    if tz is None:
        raise ValueError(f"unknown timezone {tz_name!r} (use one of {sorted(TIMEZONES)})")
    totals: dict[date, int] = {}
    hateful: dict[date, int] = {}
    skipped = 0
    for doc in corpus:
        if doc.timestamp is None:
            skipped += 1
            continue
        day = _bucket_day(doc.timestamp, tz)
        totals[day] = totals.get(day, 0) + 1
        if doc.id in pool:
            hateful[day] = hateful.get(day, 0) + 1
    if not totals:
        raise ValueError("no timestamped documents in corpus")

    first, last = min(totals), max(totals)
    buckets = []
    day = first
    while day <= last:
        total = totals.get(day, 0)
        hate = hateful.get(day, 0)
        ratio = hate / total if total > 0 else 0.0
        buckets.append((day, hate, total, ratio))
        day += timedelta(days=1)
    return TemporalHistogram(buckets=buckets, skipped_no_timestamp=skipped,
                             timezone_name=tz_name.lower())


def top_k(pool: LabelPool, corpus: Corpus, field: str, k: int = 30) -> list[tuple[str, int]]:
    """Most frequent mentions or hashtags across hateful documents.

    An item counts once per document; ties break lexicographically.
    """
    if field not in ("mentions", "hashtags"):
        raise ValueError("field must be 'mentions' or 'hashtags'")
    counts: dict[str, int] = {}
    for doc_id in pool:
        doc = corpus.get(doc_id)
        if doc is None:
            continue
        for item in getattr(doc, field):
            counts[item] = counts.get(item, 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:k]


def write_temporal_csv(hist: TemporalHistogram, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["day", "hateful", "total", "ratio"])
        for day, hate, total, ratio in hist.buckets:
            writer.writerow([day.isoformat(), hate, total, f"{ratio:.6f}"])


def write_top_csv(ranked: list[tuple[str, int]], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "item", "count"])
        for rank, (item, count) in enumerate(ranked, start=1):
            writer.writerow([rank, item, count])
