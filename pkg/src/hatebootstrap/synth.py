"""Deterministic synthetic corpus generator with planted structure.

Three document classes are planted alongside benign background docs:

* explicit docs carrying one of the built-in seed slurs, a quota of which
  also carry a planted synthetic slur so the term learner can recover it
  from the seed-labeled pool (each planted slur appears in enough seed docs
  to clear the count threshold, and nowhere in the background, so its
  relative-frequency ratio clears the ratio threshold by construction);
* explicit docs carrying only a planted slur (reachable via term matching);
* implicit docs marked by the co-occurrence of a benign token pair; each
  pair token also appears alone in background docs frequently enough that
  no single token can ever clear the ratio threshold.

Documents are length-matched across classes, shuffled, timestamped, and
written as JSONL together with a ground-truth file, a random embedding
table covering the vocabulary, a labeled validation sample, and a metadata
file recording what was planted.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .lexicon import SEED_TERMS

BASE_EPOCH = 1477958400  # 2016-11-01 00:00:00 UTC
SPAN_DAYS = 14


@dataclass
class SynthConfig:
    n_docs: int = 100000
    n_planted_slurs: int = 30
    n_patterns: int = 10
    seed: int = 7
    n_seed_docs: int = 400
    slur_seed_quota: int = 12      # seed docs carrying each planted slur
    slur_extra_quota: int = 12     # slur-only hateful docs per planted slur
    pattern_seed_quota: int = 30   # seed docs carrying each pattern pair
    pattern_extra_quota: int = 70  # implicit-only docs per pattern
    n_weak_slurs: int = 10         # planted slurs with no embedding signal
    n_weak_seeds: int = 6          # seed terms with no embedding signal
    vocab_size: int = 2000
    ctx_doc_rate: float = 0.3      # background docs containing lone pair tokens
    min_len: int = 6
    max_len: int = 10
    embed_dim: int = 16
    n_validation: int = 300
    n_validation_hateful: int = 100


@dataclass
class SynthResult:
    corpus_path: str
    truth_path: str
    embeddings_path: str
    validation_path: str
    meta_path: str
    planted_slurs: list[str]
    patterns: list[tuple[str, str]]
    counts: dict[str, int] = field(default_factory=dict)


def _zipf_weights(n: int) -> np.ndarray:
    w = 1.0 / (np.arange(n) + 10.0)
    return w / w.sum()


class _DocSpec:
    __slots__ = ("signals", "hateful", "is_seed_doc")

    def __init__(self, signals: list[str], hateful: bool, is_seed_doc: bool = False):
        self.signals = signals
        self.hateful = hateful
        self.is_seed_doc = is_seed_doc


def generate(cfg: SynthConfig, out_dir: str) -> SynthResult:
    """Write the synthetic corpus and companion files; fully deterministic."""
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    slurs = [f"xslur{i:02d}" for i in range(cfg.n_planted_slurs)]
    patterns = [(f"ctxa{p:02d}", f"ctxb{p:02d}") for p in range(cfg.n_patterns)]
    vocab = [f"w{k:04d}" for k in range(cfg.vocab_size)]
    seed_terms = list(SEED_TERMS)

    n_planted_docs = cfg.n_planted_slurs * cfg.slur_extra_quota
    n_implicit_docs = cfg.n_patterns * cfg.pattern_extra_quota
    n_background = cfg.n_docs - cfg.n_seed_docs - n_planted_docs - n_implicit_docs
    if n_background <= 0:
        raise ValueError("n_docs too small for the requested planted quotas")
    if cfg.n_planted_slurs * cfg.slur_seed_quota > cfg.n_seed_docs:
        raise ValueError("slur seed quotas exceed the number of seed docs")
    if cfg.n_patterns * cfg.pattern_seed_quota > cfg.n_seed_docs:
        raise ValueError("pattern seed quotas exceed the number of seed docs")

    specs: list[_DocSpec] = []

    # Seed docs: every one carries a seed slur; quota assignments weave the
    # planted slurs and pattern pairs into the future iteration-0 pool.
    seed_signals: list[list[str]] = [
        [seed_terms[int(rng.integers(len(seed_terms)))]] for _ in range(cfg.n_seed_docs)
    ]
    slur_slots = rng.permutation(cfg.n_seed_docs)[: cfg.n_planted_slurs * cfg.slur_seed_quota]
    for i, slur in enumerate(slurs):
        for slot in slur_slots[i * cfg.slur_seed_quota : (i + 1) * cfg.slur_seed_quota]:
            seed_signals[int(slot)].append(slur)
    pattern_slots = rng.permutation(cfg.n_seed_docs)[: cfg.n_patterns * cfg.pattern_seed_quota]
    for p, (a, b) in enumerate(patterns):
        for slot in pattern_slots[p * cfg.pattern_seed_quota : (p + 1) * cfg.pattern_seed_quota]:
            seed_signals[int(slot)].extend((a, b))
    specs.extend(_DocSpec(sig, hateful=True, is_seed_doc=True) for sig in seed_signals)

    for slur in slurs:
        specs.extend(
            _DocSpec([slur], hateful=True) for _ in range(cfg.slur_extra_quota)
        )
    for a, b in patterns:
        for _ in range(cfg.pattern_extra_quota):
            # Pair plus one repeated side: a stronger compositional signature.
            repeat = a if rng.random() < 0.5 else b
            specs.append(_DocSpec([a, b, repeat], hateful=True))

    ctx_tokens = [t for pair in patterns for t in pair]
    for _ in range(n_background):
        signals: list[str] = []
        if rng.random() < cfg.ctx_doc_rate:
            # At most one lone pair token: never complete (or approach) a
            # pattern in background documents.
            signals.append(ctx_tokens[int(rng.integers(len(ctx_tokens)))])
        specs.append(_DocSpec(signals, hateful=False))

    # Length-matched fill from a shared background token stream.
    lengths = rng.integers(cfg.min_len, cfg.max_len + 1, size=len(specs))
    fill_needs = [max(int(L) - len(s.signals), 0) for L, s in zip(lengths, specs)]
    stream = rng.choice(cfg.vocab_size, size=sum(fill_needs), p=_zipf_weights(cfg.vocab_size))

    mention_pool = [f"@user{j}" for j in range(10)]
    hateful_mentions = [f"@target{j}" for j in range(3)]
    hashtag_pool = [f"#tag{j}" for j in range(10)]

    docs: list[tuple[str, bool, bool]] = []  # (text, hateful, is_seed_doc)
    pos = 0
    for spec, need in zip(specs, fill_needs):
        tokens = [vocab[int(k)] for k in stream[pos : pos + need]]
        pos += need
        tokens.extend(spec.signals)
        perm = rng.permutation(len(tokens))
        tokens = [tokens[int(i)] for i in perm]
        if rng.random() < 0.05:
            src = hateful_mentions if spec.hateful else mention_pool
            tokens.append(src[int(rng.integers(len(src)))])
        if rng.random() < 0.05:
            tokens.append(hashtag_pool[int(rng.integers(len(hashtag_pool)))])
        docs.append((" ".join(tokens), spec.hateful, spec.is_seed_doc))

    order = rng.permutation(len(docs))
    day_offsets = rng.integers(0, SPAN_DAYS, size=len(docs))
    sec_offsets = rng.integers(0, 86400, size=len(docs))

    os.makedirs(out_dir, exist_ok=True)
    corpus_path = os.path.join(out_dir, "corpus.jsonl")
    truth_path = os.path.join(out_dir, "truth.csv")
    embeddings_path = os.path.join(out_dir, "embeddings.txt")
    validation_path = os.path.join(out_dir, "validation.csv")
    meta_path = os.path.join(out_dir, "synth_meta.json")

    hateful_ids: list[str] = []
    background_ids: list[str] = []
    id_text: dict[str, str] = {}
    with open(corpus_path, "w", encoding="utf-8") as fh:
        for new_idx, old_idx in enumerate(order):
            text, hateful, _ = docs[int(old_idx)]
            doc_id = f"d{new_idx:07d}"
            ts = BASE_EPOCH + int(day_offsets[new_idx]) * 86400 + int(sec_offsets[new_idx])
            fh.write(json.dumps({"id": doc_id, "text": text, "ts": ts}) + "\n")
            id_text[doc_id] = text
            (hateful_ids if hateful else background_ids).append(doc_id)

    with open(truth_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "label"])
        for new_idx, old_idx in enumerate(order):
            writer.writerow([f"d{new_idx:07d}", 1 if docs[int(old_idx)][1] else 0])

    # Embeddings mimic pretrained-vector geometry: slur-like tokens share a
    # common direction, the two sides of each implicit pattern share a
    # per-pattern direction plus a weaker pull toward the hate cluster, and
    # plain background tokens are shrunk along every signal direction so the
    # benign cloud stays separable from the planted structure.
    all_tokens = vocab + ctx_tokens + slurs + seed_terms
    hate_dir = rng.normal(0.0, 1.0, size=cfg.embed_dim)
    hate_dir /= np.linalg.norm(hate_dir)
    ctx_dirs = rng.normal(0.0, 1.0, size=(cfg.n_patterns, cfg.embed_dim))
    ctx_dirs /= np.linalg.norm(ctx_dirs, axis=1, keepdims=True)
    signal_dirs = np.vstack([hate_dir[None, :], ctx_dirs])

    vecs = rng.normal(0.0, 1.0, size=(len(all_tokens), cfg.embed_dim))
    projections = vecs @ signal_dirs.T  # (tokens, 1 + n_patterns)
    vecs -= 0.5 * projections @ signal_dirs
    pair_dir = {}
    for p, (a, b) in enumerate(patterns):
        pair_dir[a] = ctx_dirs[p]
        pair_dir[b] = ctx_dirs[p]
    # Weak slurs and weak seed terms keep plain noise vectors: rare slang the
    # embedding model barely knows. Weak-slur documents are reachable only by
    # exact term matching (the explicit path's edge), and weak-seed documents
    # force the classifier to explain pool members through their pattern
    # pairs instead of the seed token (the implicit path's edge).
    weak = set(slurs[: cfg.n_weak_slurs])
    weak_seed_idx = rng.choice(len(seed_terms), size=cfg.n_weak_seeds, replace=False)
    weak |= {seed_terms[int(i)] for i in weak_seed_idx}
    for k, tok in enumerate(all_tokens):
        if tok in weak:
            continue
        if tok in slurs or tok in seed_terms:
            vecs[k] = 0.5 * vecs[k] + 6.0 * hate_dir
        elif tok in pair_dir:
            vecs[k] = 0.5 * vecs[k] + 4.0 * pair_dir[tok] + 2.5 * hate_dir
    with open(embeddings_path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(all_tokens)} {cfg.embed_dim}\n")
        for tok, vec in zip(all_tokens, vecs):
            fh.write(tok + " " + " ".join(f"{v:.6f}" for v in vec) + "\n")

    n_h = min(cfg.n_validation_hateful, len(hateful_ids))
    n_b = min(cfg.n_validation - n_h, len(background_ids))
    val_h = [hateful_ids[int(i)] for i in rng.choice(len(hateful_ids), size=n_h, replace=False)]
    val_b = [background_ids[int(i)] for i in rng.choice(len(background_ids), size=n_b, replace=False)]
    with open(validation_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "text", "label"])
        for doc_id in val_h:
            writer.writerow([doc_id, id_text[doc_id], 1])
        for doc_id in val_b:
            writer.writerow([doc_id, id_text[doc_id], 0])

    counts = {
        "n_docs": len(docs),
        "n_seed_docs": cfg.n_seed_docs,
        "n_planted_docs": n_planted_docs,
        "n_implicit_docs": n_implicit_docs,
        "n_background": n_background,
        "n_hateful": len(hateful_ids),
    }
    meta = {
        "config": asdict(cfg),
        "planted_slurs": slurs,
        "patterns": [list(p) for p in patterns],
        "counts": counts,
    }
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")

    return SynthResult(
        corpus_path=corpus_path,
        truth_path=truth_path,
        embeddings_path=embeddings_path,
        validation_path=validation_path,
        meta_path=meta_path,
        planted_slurs=slurs,
        patterns=patterns,
        counts=counts,
    )


def load_truth(path: str) -> set[str]:
    """Read the ground-truth CSV back as the set of hateful doc ids."""
    hateful = set()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["id", "label"]:
            raise ValueError("expected header id,label")
        for row in reader:
            if len(row) >= 2 and row[1] == "1":
                hateful.add(row[0])
    return hateful


@dataclass
class DriftFixtureResult:
    corpus_path: str
    embeddings_path: str
    validation_path: str


def drift_fixture(out_dir: str, seed: int = 11) -> DriftFixtureResult:
    """A small corpus engineered to trip the precision stopping rule at
    iteration 2.

    A drift token rides along with a planted slur, so it enters the pool
    only after iteration 1's term matching; the iteration-2 classifier then
    scores drift-token validation docs (labeled 0) confidently, dragging
    threshold precision under the stop threshold. Iteration 1's classifier
    has never seen the drift token in a positive, so its validation
    predictions stay precise.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    vocab = [f"w{k:04d}" for k in range(300)]
    drift = "driftx"
    slur = "xslur00"
    seed_term_pool = list(SEED_TERMS)

    docs: list[tuple[str, int]] = []  # (text, label)

    def fill(signals: list[str], length: int) -> str:
        toks = [vocab[int(k)] for k in rng.integers(0, len(vocab), size=max(length - len(signals), 0))]
        toks.extend(signals)
        perm = rng.permutation(len(toks))
        return " ".join(toks[int(i)] for i in perm)

    # Seed docs: each carries a seed slur; enough also carry the planted slur
    # for it to clear the learner thresholds at iteration 1 (count 40 in a
    # 600-token pool vs 100 in ~200k corpus tokens: ratio ~134).
    for k in range(60):
        signals = [seed_term_pool[int(rng.integers(len(seed_term_pool)))]]
        if k < 40:
            signals.append(slur)
        docs.append((fill(signals, 10), 1))
    # Drift docs: planted slur + doubled drift token, matched at iteration 1.
    for _ in range(60):
        docs.append((fill([slur, drift, drift], 10), 1))
    for _ in range(20000):
        docs.append((fill([], 10), 0))

    order = rng.permutation(len(docs))
    os.makedirs(out_dir, exist_ok=True)
    corpus_path = os.path.join(out_dir, "corpus.jsonl")
    with open(corpus_path, "w", encoding="utf-8") as fh:
        for new_idx, old_idx in enumerate(order):
            text, _ = docs[int(old_idx)]
            fh.write(json.dumps({"id": f"d{new_idx:07d}", "text": text}) + "\n")

    all_tokens = vocab + [drift, slur] + seed_term_pool
    vecs = rng.normal(0.0, 1.0, size=(len(all_tokens), 12))
    hate_dir = rng.normal(0.0, 1.0, size=12)
    hate_dir /= np.linalg.norm(hate_dir)
    for k, tok in enumerate(all_tokens):
        if tok == slur or tok in seed_term_pool:
            vecs[k] = 0.5 * vecs[k] + 6.0 * hate_dir
    # The drift token stays pure noise: invisible until its docs reach the pool.
    embeddings_path = os.path.join(out_dir, "embeddings.txt")
    with open(embeddings_path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(all_tokens)} 12\n")
        for tok, vec in zip(all_tokens, vecs):
            fh.write(tok + " " + " ".join(f"{v:.6f}" for v in vec) + "\n")

    # Validation: a few true positives the iteration-1 classifier already
    # scores confidently, and many drift docs labeled 0 that only the
    # iteration-2 classifier will score above threshold.
    validation_path = os.path.join(out_dir, "validation.csv")
    with open(validation_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "text", "label"])
        for k in range(5):
            term = seed_term_pool[int(rng.integers(len(seed_term_pool)))]
            writer.writerow([f"v_pos{k}", fill([term, term], 10), 1])
        for k in range(20):
            writer.writerow([f"v_drift{k}", fill([drift, drift, drift], 10), 0])

    return DriftFixtureResult(
        corpus_path=corpus_path,
        embeddings_path=embeddings_path,
        validation_path=validation_path,
    )
