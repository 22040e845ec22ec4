"""Seed and learned hate-indicator terms plus the slur term learner.

The learner scores every unigram that occurs at least ``min_count`` times in
the hateful pool by the ratio of its relative frequency in the pool over its
relative frequency in the whole unlabeled corpus, and admits terms whose
score clears ``ratio_threshold``. Admitted terms are expanded to singular and
plural surface forms, like the seeds.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .corpus import SPECIAL_TOKENS, Corpus, Document

# Built-in seed slur list: 20 base terms, matched in singular and plural form.
SEED_TERMS = (
    "bimbo", "chink", "commie", "coon", "cunt",
    "fag", "faggot", "feminazi", "honky", "islamist",
    "libtard", "muzzie", "negro", "nigger", "paki",
    "skank", "subhuman", "tranny", "twat", "wanker",
)

DEFAULT_MIN_COUNT = 10
DEFAULT_RATIO_THRESHOLD = 100.0

_ES_SUFFIXES = ("s", "x", "z", "ch", "sh")
_VOWELS = "aeiou"


@dataclass
class LexEntry:
    term: str
    score: float  # seeds carry +inf
    is_seed: bool
    iteration_found: int
    hateful_count: int = 0
    unlabeled_count: int = 0
    smoothed: bool = False  # True when the corpus count was zero and clamped to 1


class Lexicon:
    """Term -> LexEntry mapping; every term is a single normalized token."""

    def __init__(self) -> None:
        self.entries: dict[str, LexEntry] = {}

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, term: str) -> bool:
        return term in self.entries

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Lexicon) and self.entries == other.entries

    def terms(self) -> set[str]:
        return set(self.entries)

    def add(self, entry: LexEntry) -> bool:
        """Insert an entry unless the term is already present."""
        if entry.term in self.entries:
            return False
        self.entries[entry.term] = entry
        return True

    def seed_terms(self) -> set[str]:
        return {t for t, e in self.entries.items() if e.is_seed}

    def learned_terms(self) -> set[str]:
        return {t for t, e in self.entries.items() if not e.is_seed}


def inflect(term: str) -> set[str]:
    """Return {term, plural(term)} under the fixed pluralization rule."""
    if term.endswith("y") and len(term) >= 2 and term[-2] not in _VOWELS:
        plural = term[:-1] + "ies"
    elif term.endswith(_ES_SUFFIXES):
        plural = term + "es"
    else:
        plural = term + "s"
    return {term, plural}


def seed_lexicon() -> Lexicon:
    """The built-in seed terms, singular+plural, all at iteration 0."""
    lex = Lexicon()
    for term in SEED_TERMS:
        for form in sorted(inflect(term)):
            lex.add(
                LexEntry(
                    term=form,
                    score=math.inf,
                    is_seed=True,
                    iteration_found=0,
                )
            )
    return lex


def match(doc: Document, lex: Lexicon) -> set[str]:
    """Lexicon terms appearing in doc.tokens as whole tokens (no substrings)."""
    return {tok for tok in doc.tokens if tok in lex.entries}


def learn_terms(
    pool_docs: Iterable[Document],
    corpus: Corpus,
    lex: Lexicon,
    min_count: int = DEFAULT_MIN_COUNT,
    ratio_threshold: float = DEFAULT_RATIO_THRESHOLD,
    iteration: int = 1,
) -> list[LexEntry]:
    """Learn new slur terms from the hateful pool against the full corpus.

    For each unigram with hateful count >= min_count, the score is
    ``(c_hate / hate_tokens) / (c_corpus / corpus_tokens)``; terms scoring at
    or above ``ratio_threshold`` are admitted. Terms already in the lexicon
    and the normalization class tokens are excluded. A zero corpus count is
    clamped to 1 and the entry flagged as smoothed. Each admitted unigram is
    also expanded to its plural surface form, carrying the same admission
    evidence.
    """
    hate_counts: Counter = Counter()
    for doc in pool_docs:
        hate_counts.update(doc.tokens)
    hate_total = sum(hate_counts.values())
    if hate_total == 0:
        raise ValueError("hateful pool is empty")
    if corpus.total_token_count == 0:
        raise ValueError("corpus token totals not computed")

    special = set(SPECIAL_TOKENS)
    admitted: list[LexEntry] = []
    seen: set[str] = set()
    for term in sorted(hate_counts):
        c_hate = hate_counts[term]
        if c_hate < min_count or term in lex.entries or term in special:
            continue
        c_corpus = corpus.token_totals.get(term, 0)
        smoothed = c_corpus == 0
        score = (c_hate / hate_total) / (max(c_corpus, 1) / corpus.total_token_count)
        if score < ratio_threshold:
            continue
        for form in sorted(inflect(term)):
            if form in lex.entries or form in seen:
                continue
            seen.add(form)
            admitted.append(
                LexEntry(
                    term=form,
                    score=score,
                    is_seed=False,
                    iteration_found=iteration,
                    hateful_count=c_hate,
                    unlabeled_count=c_corpus,
                    smoothed=smoothed,
                )
            )
    return admitted


def save_lexicon(lex: Lexicon, path: str) -> None:
    """One entry per line: ``term<TAB>score<TAB>is_seed<TAB>iteration``."""
    with open(path, "w", encoding="utf-8") as fh:
        for term in sorted(lex.entries):
            e = lex.entries[term]
            score = "inf" if math.isinf(e.score) else repr(e.score)
            fh.write(f"{term}\t{score}\t{'true' if e.is_seed else 'false'}\t{e.iteration_found}\n")


def load_lexicon(path: str) -> Lexicon:
    lex = Lexicon()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4 or parts[2] not in ("true", "false"):
                raise ValueError(f"line {lineno}: malformed lexicon entry")
            term, score_str, seed_str, iter_str = parts
            lex.add(
                LexEntry(
                    term=term,
                    score=float(score_str),
                    is_seed=seed_str == "true",
                    iteration_found=int(iter_str),
                )
            )
    return lex
