"""The growing pool of automatically labeled hateful documents.

Each entry records which path labeled the document (``seed``, ``slur`` or
``lstm``), the bootstrapping iteration of admission, and the classifier score
when the lstm path found it. A document is admitted at most once: the first
labeler wins, and within one iteration the slur path is applied before the
lstm path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Optional

VALID_SOURCES = ("seed", "slur", "lstm")


@dataclass(frozen=True)
class PoolEntry:
    source: str
    iteration: int
    score: Optional[float] = None


class LabelPool:
    """Mapping doc id -> PoolEntry with first-labeler-wins admission."""

    def __init__(self) -> None:
        self.entries: dict[str, PoolEntry] = {}

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self.entries

    def __iter__(self) -> Iterator[str]:
        return iter(self.entries)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LabelPool) and self.entries == other.entries

    def add(self, doc_id: str, source: str, iteration: int, score: Optional[float] = None) -> bool:
        """Admit a document; returns False when it is already pooled."""
        if source not in VALID_SOURCES:
            raise ValueError(f"unknown source tag: {source!r}")
        if iteration < 0:
            raise ValueError("iteration must be >= 0")
        if doc_id in self.entries:
            return False
        self.entries[doc_id] = PoolEntry(source=source, iteration=iteration, score=score)
        return True

    def ids(self) -> set[str]:
        return set(self.entries)

    def count_by_source(self, source: str) -> int:
        return sum(1 for e in self.entries.values() if e.source == source)


def save_labeled(pool: LabelPool, path: str) -> None:
    """Write the pool as JSONL, one ``{id, source, iteration[, score]}`` per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc_id, entry in pool.entries.items():
            record = {"id": doc_id, "source": entry.source, "iteration": entry.iteration}
            if entry.score is not None:
                record["score"] = entry.score
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def load_labeled(path: str) -> LabelPool:
    """Read a pool file back; raises ValueError naming the offending line."""
    pool = LabelPool()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {lineno}: invalid JSON ({exc})") from None
            source = record.get("source")
            if source not in VALID_SOURCES:
                raise ValueError(f"line {lineno}: unknown source tag {source!r}")
            doc_id = record.get("id")
            iteration = record.get("iteration")
            if not isinstance(doc_id, str) or not isinstance(iteration, int) or iteration < 0:
                raise ValueError(f"line {lineno}: malformed pool record")
            pool.add(doc_id, source, iteration, record.get("score"))
    return pool
