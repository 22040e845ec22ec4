"""Command-line entry point.

Subcommands: ingest, bootstrap, evaluate (sample|estimate), analyze
(temporal|top), synth, gradcheck. Runs are driven by a JSON config file
(unknown keys rejected); common flags override config values. Exit codes:
0 success, 1 runtime failure (one-line diagnostic on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from . import analysis, engine, evaluation, synth
from .corpus import ingest
from .embedding import load_embeddings
from .lexicon import save_lexicon
from .neuralnet import TrainConfig, gradient_check, save_model
from .pool import load_labeled, save_labeled

_TRAIN_KEYS = {f.name for f in dataclasses.fields(TrainConfig)}
_CONFIG_KEYS = {
    "corpus", "corpus_format", "embeddings", "mode", "max_iterations",
    "stop_precision", "min_count", "ratio_threshold", "validation",
    "rng_seed", "out_dir", "train",
}


def _load_run_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError("config must be a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    train_raw = raw.get("train", {})
    unknown_train = set(train_raw) - _TRAIN_KEYS
    if unknown_train:
        raise ValueError(f"unknown train config keys: {sorted(unknown_train)}")
    return raw


def _cmd_ingest(args: argparse.Namespace) -> int:
    corpus = ingest(args.input, format=args.format)
    print(f"documents {len(corpus)} dropped {corpus.dropped_count} "
          f"tokens {corpus.total_token_count}")
    return 0


def _cmd_bootstrap(args: argparse.Namespace) -> int:
    raw = _load_run_config(args.config)
    if args.mode:
        raw["mode"] = args.mode
    if args.seed is not None:
        raw["rng_seed"] = args.seed
    if args.out:
        raw["out_dir"] = args.out
    for key in ("corpus", "out_dir"):
        if key not in raw:
            raise ValueError(f"config key {key!r} is required")

    corpus = ingest(raw["corpus"], format=raw.get("corpus_format", "jsonl"))
    table = None
    mode = raw.get("mode", "two_path")
    if mode != "slur_only":
        if "embeddings" not in raw:
            raise ValueError("config key 'embeddings' is required unless mode=slur_only")
        table = load_embeddings(raw["embeddings"])
    validation = None
    if raw.get("validation"):
        validation = engine.load_validation_csv(raw["validation"])

    cfg = engine.BootstrapConfig(
        mode=mode,
        max_iterations=raw.get("max_iterations", 4),
        stop_precision=raw.get("stop_precision", 0.6),
        min_count=raw.get("min_count", 10),
        ratio_threshold=raw.get("ratio_threshold", 100.0),
        train=TrainConfig(**raw.get("train", {})),
        rng_seed=raw.get("rng_seed", 0),
        validation=validation,
    )
    out_dir = raw["out_dir"]
    os.makedirs(out_dir, exist_ok=True)
    result = engine.run(corpus, cfg, table, snapshot_dir=out_dir)

    save_labeled(result.pool, os.path.join(out_dir, "final_pool.jsonl"))
    save_lexicon(result.lexicon, os.path.join(out_dir, "final_lexicon.tsv"))
    if result.model is not None:
        save_model(result.model, os.path.join(out_dir, "final_model.bin"))
    for name, ids in (("slur_found.txt", result.slur_found),
                      ("lstm_found.txt", result.lstm_found)):
        with open(os.path.join(out_dir, name), "w", encoding="utf-8") as fh:
            for doc_id in sorted(ids):
                fh.write(doc_id + "\n")
    inter, lstm_only, slur_only = engine.segment_counts(result.slur_found, result.lstm_found)
    engine.write_manifest(
        result, cfg, os.path.join(out_dir, "manifest.json"),
        extra={"segments": {"intersection": inter, "lstm_only": lstm_only,
                            "slur_only": slur_only}},
    )
    print(f"stopped: {result.stop_reason} after {len(result.logs)} iterations; "
          f"pool {len(result.pool)} lexicon {len(result.lexicon)}")
    return 0


def _cmd_evaluate_sample(args: argparse.Namespace) -> int:
    pool = load_labeled(args.pool)
    corpus = ingest(args.corpus, format=args.format)
    sample = evaluation.draw_sample(pool.ids(), k=args.k, seed=args.seed)
    evaluation.export_annotation_csv(sample, corpus, args.out)
    print(f"sampled {len(sample)} of {len(pool)} tagged documents -> {args.out}")
    return 0


def _cmd_evaluate_estimate(args: argparse.Namespace) -> int:
    report = evaluation.estimate(
        args.n, args.k, args.tagged, args.corpus_size, base_rate=args.base_rate
    )
    print(f"precision {report.precision:.3f} recall {report.recall_estimate:.3f} "
          f"f1 {report.f1:.3f}")
    capped = " (capped)" if report.recall_capped else ""
    print(f"estimated-hateful {report.estimated_hateful:.1f} "
          f"tagged {report.tagged_count}{capped}")
    return 0


def _cmd_analyze_temporal(args: argparse.Namespace) -> int:
    pool = load_labeled(args.pool)
    corpus = ingest(args.corpus, format=args.format)
    hist = analysis.temporal_distribution(pool, corpus, tz_name=args.tz)
    analysis.write_temporal_csv(hist, args.out)
    print(f"{len(hist.buckets)} daily buckets "
          f"(skipped {hist.skipped_no_timestamp} without timestamps) -> {args.out}")
    return 0


def _cmd_analyze_top(args: argparse.Namespace) -> int:
    pool = load_labeled(args.pool)
    corpus = ingest(args.corpus, format=args.format)
    ranked = analysis.top_k(pool, corpus, field=args.field, k=args.k)
    analysis.write_top_csv(ranked, args.out)
    print(f"top {len(ranked)} {args.field} -> {args.out}")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    cfg = synth.SynthConfig(
        n_docs=args.docs,
        n_planted_slurs=args.planted_slurs,
        n_patterns=args.implicit_patterns,
        seed=args.seed,
        embed_dim=args.embed_dim,
    )
    result = synth.generate(cfg, args.out)
    print(f"corpus {result.corpus_path} ({result.counts['n_docs']} docs, "
          f"{result.counts['n_hateful']} hateful)")
    return 0


def _cmd_gradcheck(args: argparse.Namespace) -> int:
    import numpy as np

    worst = 0.0
    for trial in range(args.trials):
        rng = np.random.Generator(np.random.PCG64(args.seed + trial))
        h = int(rng.integers(1, 5))
        d = int(rng.integers(1, 4))
        L = int(rng.integers(1, 6))
        err = gradient_check(args.seed + trial, hidden_size=h, input_size=d,
                             seq_len=L, batch=4)
        worst = max(worst, err)
        print(f"trial {trial:02d} hidden={h} input={d} len={L} max-rel-err {err:.3e}")
    ok = worst <= 1e-4
    print(f"{'PASS' if ok else 'FAIL'}: worst {worst:.3e} (tolerance 1e-4)")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hatebootstrap")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a corpus file and report stats")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("jsonl", "tsv"), default="jsonl")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("bootstrap", help="run the bootstrapping loop")
    p.add_argument("--config", required=True)
    p.add_argument("--mode", choices=engine.MODES)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_bootstrap)

    p = sub.add_parser("evaluate", help="sampling-based evaluation")
    esub = p.add_subparsers(dest="subcommand", required=True)
    ps = esub.add_parser("sample", help="draw an annotation sample from a pool")
    ps.add_argument("--pool", required=True)
    ps.add_argument("--corpus", required=True)
    ps.add_argument("--format", choices=("jsonl", "tsv"), default="jsonl")
    ps.add_argument("--k", type=int, default=1000)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--out", required=True)
    ps.set_defaults(func=_cmd_evaluate_sample)
    pe = esub.add_parser("estimate", help="precision/recall/F1 from sample counts")
    pe.add_argument("--n", type=int, required=True)
    pe.add_argument("--k", type=int, default=1000)
    pe.add_argument("--tagged", type=int, required=True)
    pe.add_argument("--corpus-size", type=int, required=True)
    pe.add_argument("--base-rate", type=float, default=evaluation.DEFAULT_BASE_RATE)
    pe.set_defaults(func=_cmd_evaluate_estimate)

    p = sub.add_parser("analyze", help="pool analyses")
    asub = p.add_subparsers(dest="subcommand", required=True)
    pt = asub.add_parser("temporal", help="daily hateful counts and ratios")
    pt.add_argument("--pool", required=True)
    pt.add_argument("--corpus", required=True)
    pt.add_argument("--format", choices=("jsonl", "tsv"), default="jsonl")
    pt.add_argument("--tz", default="utc", choices=sorted(analysis.TIMEZONES))
    pt.add_argument("--out", required=True)
    pt.set_defaults(func=_cmd_analyze_temporal)
    pk = asub.add_parser("top", help="top mentions or hashtags")
    pk.add_argument("--pool", required=True)
    pk.add_argument("--corpus", required=True)
    pk.add_argument("--format", choices=("jsonl", "tsv"), default="jsonl")
    pk.add_argument("--field", choices=("mentions", "hashtags"), required=True)
    pk.add_argument("--k", type=int, default=30)
    pk.add_argument("--out", required=True)
    pk.set_defaults(func=_cmd_analyze_top)

    p = sub.add_parser("synth", help="generate a synthetic planted corpus")
    p.add_argument("--docs", type=int, default=100000)
    p.add_argument("--planted-slurs", type=int, default=30)
    p.add_argument("--implicit-patterns", type=int, default=10)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--embed-dim", type=int, default=16)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("gradcheck", help="finite-difference check of BPTT gradients")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
