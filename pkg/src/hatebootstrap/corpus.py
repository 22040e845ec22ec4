"""Corpus ingestion, tweet-style normalization, and metadata extraction.

Raw documents come from JSONL (``{"id": ..., "text": ..., "ts": ...}``) or
TSV (``id<TAB>ts<TAB>text``) files. Each admitted document carries normalized
tokens plus the mentions/hashtags found in the raw text; documents that
normalize to zero tokens, repeat an id, or miss required fields are dropped
and tallied.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Iterator, Optional

from .pool import LabelPool, load_labeled, save_labeled  # noqa: F401  (corpus API surface)

SPECIAL_TOKENS = ("<url>", "<user>", "<number>", "<emoji>", "<smile>", "<sadface>")

_URL_RE = re.compile(r"(?:https?://|www\.)\S+")
_MENTION_RE = re.compile(r"@\w+")
_HASHTAG_RE = re.compile(r"#\w+")
_NUMBER_RE = re.compile(r"(?<![\w<])\d+(?:[.,]\d+)*(?!\w)")
_HASH_STRIP_RE = re.compile(r"#(?=\w)")
_TOKEN_RE = re.compile(r"<(?:url|user|number|emoji|smile|sadface)>|\w+(?:'\w+)*|[^\w\s]")

# Codepoints that only modify the rendering of an adjacent emoji.
_EMOJI_JOINERS = ("️", "‍")
_EMOJI_RANGES = (
    (0x1F000, 0x1FAFF),
    (0x2600, 0x27BF),
    (0x2B00, 0x2BFF),
    (0xFE00, 0xFE0F),
    (0x1F1E6, 0x1F1FF),
)


def _load_emoji_table() -> dict[str, str]:
    with resources.files("hatebootstrap.data").joinpath("emoji_map.json").open(
        "r", encoding="utf-8"
    ) as fh:
        return json.load(fh)


_EMOJI_TABLE = _load_emoji_table()
_ASCII_EMOTICONS = {k: v for k, v in _EMOJI_TABLE.items() if k.isascii()}
_UNICODE_EMOJI = {k: v for k, v in _EMOJI_TABLE.items() if not k.isascii()}
_EMOTICON_RE = re.compile(
    r"(?:^|(?<=\s))("
    + "|".join(re.escape(k) for k in sorted(_ASCII_EMOTICONS, key=len, reverse=True))
    + r")(?=\s|$)"
)


def _is_emoji_char(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _EMOJI_RANGES)


def _map_unicode_emoji(text: str) -> str:
    if text.isascii():
        return text
    out: list[str] = []
    for ch in text:
        if ch in _EMOJI_JOINERS:
            continue
        if ch in _UNICODE_EMOJI:
            out.append(f" {_UNICODE_EMOJI[ch]} ")
        elif _is_emoji_char(ch):
            out.append(" <emoji> ")
        else:
            out.append(ch)
    return "".join(out)


def normalize(raw_text: str) -> list[str]:
    """Normalize raw text into token strings.

    Rule order: lowercase; URLs -> ``<url>``; @handles -> ``<user>``;
    numbers -> ``<number>``; emoji/emoticons -> class tokens per the bundled
    table (unknown emoji -> ``<emoji>``); strip ``#`` off hashtags; split on
    whitespace/punctuation keeping contractions and class tokens intact.
    Total function; idempotent on its own space-joined output.
    """
    text = raw_text.lower()
    text = _URL_RE.sub(" <url> ", text)
    text = _MENTION_RE.sub(" <user> ", text)
    text = _NUMBER_RE.sub("<number>", text)
    text = _EMOTICON_RE.sub(lambda m: _ASCII_EMOTICONS[m.group(1)], text)
    text = _map_unicode_emoji(text)
    text = _HASH_STRIP_RE.sub("", text)
    return _TOKEN_RE.findall(text)


def extract_metadata(raw_text: str) -> tuple[frozenset[str], frozenset[str]]:
    """Return (mentions, hashtags) found in the raw text, lowercased, deduped."""
    lowered = raw_text.lower()
    mentions = frozenset(_MENTION_RE.findall(lowered))
    hashtags = frozenset(_HASHTAG_RE.findall(lowered))
    return mentions, hashtags


@dataclass(frozen=True)
class Document:
    """One normalized text unit. Immutable; safe to share across workers."""

    id: str
    raw_text: str
    tokens: tuple[str, ...]
    timestamp: Optional[int] = None
    mentions: frozenset[str] = frozenset()
    hashtags: frozenset[str] = frozenset()


def make_document(doc_id: str, raw_text: str, timestamp: Optional[int] = None) -> Optional[Document]:
    """Build a Document, or None when normalization yields no tokens."""
    tokens = normalize(raw_text)
    if not tokens:
        return None
    mentions, hashtags = extract_metadata(raw_text)
    return Document(
        id=doc_id,
        raw_text=raw_text,
        tokens=tuple(tokens),
        timestamp=timestamp,
        mentions=mentions,
        hashtags=hashtags,
    )


@dataclass
class Corpus:
    """Indexed document collection with corpus-wide token statistics."""

    documents: dict[str, Document] = field(default_factory=dict)
    token_totals: Counter = field(default_factory=Counter)
    total_token_count: int = 0
    dropped_count: int = 0

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents.values())

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self.documents

    def get(self, doc_id: str) -> Optional[Document]:
        return self.documents.get(doc_id)

    @classmethod
    def build(cls, docs: Iterable[Document], dropped: int = 0) -> "Corpus":
        """Assemble a corpus from already-constructed documents (first id wins)."""
        corpus = cls(dropped_count=dropped)
        for doc in docs:
            if doc.id in corpus.documents:
                corpus.dropped_count += 1
                continue
            corpus.documents[doc.id] = doc
            corpus.token_totals.update(doc.tokens)
            corpus.total_token_count += len(doc.tokens)
        return corpus


def _iter_jsonl_records(path: str) -> Iterator[tuple[Optional[str], Optional[str], Optional[int]]]:
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                yield None, None, None
                continue
            if not isinstance(obj, dict):
                yield None, None, None
                continue
            doc_id = obj.get("id")
            text = obj.get("text")
            ts = obj.get("ts")
            if not isinstance(doc_id, str) or not isinstance(text, str):
                yield None, None, None
                continue
            if ts is not None and not isinstance(ts, int):
                yield None, None, None
                continue
            yield doc_id, text, ts


def _iter_tsv_records(path: str) -> Iterator[tuple[Optional[str], Optional[str], Optional[int]]]:
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t", 2)
            if len(parts) != 3 or not parts[0]:
                yield None, None, None
                continue
            doc_id, ts_str, text = parts
            ts: Optional[int] = None
            if ts_str:
                try:
                    ts = int(ts_str)
                except ValueError:
                    yield None, None, None
                    continue
            yield doc_id, text, ts


def ingest(path: str, format: str = "jsonl") -> Corpus:
    """Read a corpus file into a Corpus.

    Malformed records, duplicate ids (first wins), and documents that are
    empty after normalization are skipped and counted in ``dropped_count``.
    Raises OSError when the file cannot be read and ValueError for an
    unknown format name.
    """
    if format == "jsonl":
        records = _iter_jsonl_records(path)
    elif format == "tsv":
        records = _iter_tsv_records(path)
    else:
        raise ValueError(f"unknown corpus format: {format!r}")

    corpus = Corpus()
    for doc_id, text, ts in records:
        if doc_id is None or text is None:
            corpus.dropped_count += 1
            continue
        if doc_id in corpus.documents:
            corpus.dropped_count += 1
            continue
        doc = make_document(doc_id, text, ts)
        if doc is None:
            corpus.dropped_count += 1
            continue
        corpus.documents[doc.id] = doc
        corpus.token_totals.update(doc.tokens)
        corpus.total_token_count += len(doc.tokens)
    return corpus
