"""The two-path bootstrapping loop.

Each iteration: learn new slur terms from the current hateful pool and match
them against unlabeled documents (explicit path), retrain the LSTM from
scratch on the pool and collect its confident predictions (implicit path),
then admit the union. Both paths read the same frozen pool snapshot; the
slur path admits first, so a document found by both carries slur
attribution. The loop stops when the classifier's precision on a labeled
validation set drops below ``stop_precision``, when neither path adds
anything, or at ``max_iterations``.

Single-path ablations: ``slur_only`` skips training/prediction/validation,
``lstm_only`` skips term learning/matching.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .corpus import Corpus, normalize
from .embedding import EmbeddingTable
from .lexicon import (
    DEFAULT_MIN_COUNT,
    DEFAULT_RATIO_THRESHOLD,
    Lexicon,
    learn_terms,
    save_lexicon,
    seed_lexicon,
)
from .neuralnet import (
    LstmModel,
    SequenceIndexer,
    TrainConfig,
    init_model,
    predict_scores,
    save_model,
    train,
)
from .pool import LabelPool, save_labeled

MODES = ("two_path", "slur_only", "lstm_only")


@dataclass
class BootstrapConfig:
    mode: str = "two_path"
    max_iterations: int = 4
    stop_precision: float = 0.6
    min_count: int = DEFAULT_MIN_COUNT
    ratio_threshold: float = DEFAULT_RATIO_THRESHOLD
    train: TrainConfig = field(default_factory=TrainConfig)
    rng_seed: int = 0
    # (id, raw_text, label) rows; None disables the precision stopping rule.
    validation: Optional[list[tuple[str, str, int]]] = None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not (0.0 < self.stop_precision < 1.0):
            raise ValueError("stop_precision must be in (0, 1)")


@dataclass
class IterationLog:
    iteration: int
    pool_size_before: int
    new_by_slur: int
    new_by_lstm: int
    overlap: int
    pool_size_after: int
    lexicon_size: int
    validation_precision: Optional[float]


@dataclass
class RunResult:
    pool: LabelPool
    lexicon: Lexicon
    model: Optional[LstmModel]
    logs: list[IterationLog]
    stop_reason: str
    stop_precision: Optional[float]
    slur_found: set[str]  # ids matched by any lexicon term (seed stage included)
    lstm_found: set[str]  # ids the classifier scored above threshold
    snapshot_paths: dict[str, str] = field(default_factory=dict)


def load_validation_csv(path: str) -> list[tuple[str, str, int]]:
    """Read an annotation CSV (id,text,label) with labels filled in."""
    rows: list[tuple[str, str, int]] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]] != ["id", "text", "label"]:
            raise ValueError("line 1: expected header id,text,label")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 3 or row[2].strip() not in ("0", "1"):
                raise ValueError(f"line {lineno}: malformed validation row")
            rows.append((row[0], row[1], int(row[2].strip())))
    if not rows:
        raise ValueError("validation set is empty")
    return rows


def seed_label(corpus: Corpus, lexicon: Lexicon) -> LabelPool:
    """Label every document containing a seed term; iteration 0, source seed."""
    pool = LabelPool()
    entries = lexicon.entries
    for doc in corpus:
        if any(tok in entries for tok in doc.tokens):
            pool.add(doc.id, "seed", 0)
    return pool


def _iteration_seed(rng_seed: int, iteration: int) -> int:
    ss = np.random.SeedSequence(rng_seed, spawn_key=(iteration,))
    return int(ss.generate_state(1)[0])


def _validation_precision(model: LstmModel, validation, indexer: SequenceIndexer,
                          threshold: float) -> float:
    ids = np.zeros((len(validation), indexer.max_len), dtype=np.int32)
    lengths = np.zeros(len(validation), dtype=np.int64)
    for k, (_, text, _) in enumerate(validation):
        ids[k], lengths[k] = indexer.encode(normalize(text))
    scores = predict_scores(model, ids, lengths, indexer)
    predicted = scores >= threshold
    if not predicted.any():
        return 1.0  # an over-conservative classifier should not stop the loop
    labels = np.array([label for _, _, label in validation])
    return float(labels[predicted].mean())


def _match_new_terms(corpus: Corpus, unlabeled_ids: list[str], new_terms: set[str]) -> set[str]:
    found = set()
    for doc_id in unlabeled_ids:
        doc = corpus.documents[doc_id]
        if any(tok in new_terms for tok in doc.tokens):
            found.add(doc_id)
    return found


def run(corpus: Corpus, cfg: BootstrapConfig, table: Optional[EmbeddingTable] = None,
        snapshot_dir: Optional[str] = None) -> RunResult:
    """Execute the bootstrapping loop, returning the final pool, lexicon,
    model, and per-iteration logs. Deterministic given the config seed.

    ``table`` is required except in slur_only mode. When ``snapshot_dir`` is
    set, the pool, lexicon, and model are saved after every iteration.
    """
    if len(corpus) == 0:
        raise ValueError("corpus is empty")
    needs_lstm = cfg.mode != "slur_only"
    if needs_lstm and table is None:
        raise ValueError(f"mode {cfg.mode} requires an embedding table")

    lexicon = seed_lexicon()
    pool = seed_label(corpus, lexicon)
    if len(pool) == 0:
        raise ValueError("no documents matched the seed lexicon; nothing to bootstrap from")

    indexer = None
    corpus_ids_mat = None
    corpus_lengths = None
    row_of: dict[str, int] = {}
    if needs_lstm:
        indexer = SequenceIndexer(table, cfg.train.max_len)
        all_docs = list(corpus)
        corpus_ids_mat, corpus_lengths = indexer.encode_docs(all_docs)
        row_of = {doc.id: k for k, doc in enumerate(all_docs)}

    slur_found = pool.ids()
    lstm_found: set[str] = set()
    logs: list[IterationLog] = []
    model: Optional[LstmModel] = None
    stop_reason = "max_iterations"
    stop_precision_value: Optional[float] = None
    snapshots: dict[str, str] = {}

    for iteration in range(1, cfg.max_iterations + 1):
        pool_before = len(pool)
        pooled_ids = pool.ids()
        unlabeled_ids = [doc.id for doc in corpus if doc.id not in pooled_ids]

        slur_additions: set[str] = set()
        if cfg.mode != "lstm_only":
            pool_docs = [corpus.documents[i] for i in sorted(pooled_ids) if i in corpus.documents]
            new_entries = learn_terms(
                pool_docs, corpus, lexicon,
                min_count=cfg.min_count, ratio_threshold=cfg.ratio_threshold,
                iteration=iteration,
            )
            for entry in new_entries:
                lexicon.add(entry)
            if new_entries:
                new_terms = {e.term for e in new_entries}
                slur_additions = _match_new_terms(corpus, unlabeled_ids, new_terms)

        lstm_scores: dict[str, float] = {}
        val_precision: Optional[float] = None
        if needs_lstm:
            model = init_model(
                _iteration_seed(cfg.rng_seed, iteration),
                table.dimension, cfg.train.hidden_size,
            )
            positives = [corpus.documents[i] for i in sorted(pooled_ids)]
            negatives = [corpus.documents[i] for i in unlabeled_ids]
            model, _ = train(model, positives, negatives, cfg.train, table)

            rows = np.array([row_of[i] for i in unlabeled_ids], dtype=np.intp)
            scores = predict_scores(model, corpus_ids_mat[rows], corpus_lengths[rows], indexer)
            hit = scores >= cfg.train.confidence_threshold
            lstm_scores = {
                unlabeled_ids[k]: float(scores[k]) for k in np.flatnonzero(hit)
            }
            if cfg.validation is not None:
                val_precision = _validation_precision(
                    model, cfg.validation, indexer, cfg.train.confidence_threshold
                )

        for doc_id in sorted(slur_additions):
            pool.add(doc_id, "slur", iteration)
        for doc_id in sorted(lstm_scores):
            pool.add(doc_id, "lstm", iteration, lstm_scores[doc_id])

        slur_found |= slur_additions
        lstm_found |= set(lstm_scores)
        overlap = len(slur_additions & set(lstm_scores))
        logs.append(
            IterationLog(
                iteration=iteration,
                pool_size_before=pool_before,
                new_by_slur=len(slur_additions),
                new_by_lstm=len(lstm_scores),
                overlap=overlap,
                pool_size_after=len(pool),
                lexicon_size=len(lexicon),
                validation_precision=val_precision,
            )
        )

        if snapshot_dir is not None:
            snapshots.update(_write_snapshots(snapshot_dir, iteration, pool, lexicon, model))

        if val_precision is not None and val_precision < cfg.stop_precision:
            stop_reason = "validation_precision"
            stop_precision_value = val_precision
            break
        if not slur_additions and not lstm_scores:
            stop_reason = "no_additions"
            break

    return RunResult(
        pool=pool,
        lexicon=lexicon,
        model=model,
        logs=logs,
        stop_reason=stop_reason,
        stop_precision=stop_precision_value,
        slur_found=slur_found,
        lstm_found=lstm_found,
        snapshot_paths=snapshots,
    )


def _write_snapshots(out_dir: str, iteration: int, pool: LabelPool,
                     lexicon: Lexicon, model: Optional[LstmModel]) -> dict[str, str]:
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    pool_path = os.path.join(out_dir, f"iter_{iteration:02d}_pool.jsonl")
    save_labeled(pool, pool_path)
    paths[f"iter_{iteration:02d}_pool"] = pool_path
    lex_path = os.path.join(out_dir, f"iter_{iteration:02d}_lexicon.tsv")
    save_lexicon(lexicon, lex_path)
    paths[f"iter_{iteration:02d}_lexicon"] = lex_path
    if model is not None:
        model_path = os.path.join(out_dir, f"iter_{iteration:02d}_model.bin")
        save_model(model, model_path)
        paths[f"iter_{iteration:02d}_model"] = model_path
    return paths


def segment_counts(pool_slur, pool_lstm) -> tuple[int, int, int]:
    """Partition two per-path tagged sets into (intersection, lstm_only,
    slur_only) counts; the three segments are mutually exclusive."""
    slur_ids = pool_slur.ids() if isinstance(pool_slur, LabelPool) else set(pool_slur)
    lstm_ids = pool_lstm.ids() if isinstance(pool_lstm, LabelPool) else set(pool_lstm)
    inter = len(slur_ids & lstm_ids)
    return inter, len(lstm_ids) - inter, len(slur_ids) - inter


def write_manifest(result: RunResult, cfg: BootstrapConfig, path: str,
                   extra: Optional[dict] = None) -> None:
    """JSON run manifest: config echo, per-iteration logs, stop record,
    snapshot paths."""
    config_dict = asdict(cfg)
    if cfg.validation is not None:
        config_dict["validation"] = f"<{len(cfg.validation)} rows>"
    payload = {
        "config": config_dict,
        "iterations": [asdict(log) for log in result.logs],
        "stop": {
            "reason": result.stop_reason,
            "precision": result.stop_precision,
            "iteration": result.logs[-1].iteration if result.logs else 0,
        },
        "pool_size": len(result.pool),
        "lexicon_size": len(result.lexicon),
        "snapshots": result.snapshot_paths,
    }
    if extra:
        payload.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
