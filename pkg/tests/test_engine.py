import dataclasses
import json

import numpy as np
import pytest

from conftest import mini_bootstrap_config
from hatebootstrap import engine
from hatebootstrap.corpus import Corpus, make_document
from hatebootstrap.engine import (
    BootstrapConfig,
    load_validation_csv,
    run,
    seed_label,
    segment_counts,
    write_manifest,
)
from hatebootstrap.lexicon import seed_lexicon
from hatebootstrap.pool import LabelPool


class TestSeedLabel:
    def test_matching_docs_enter_pool(self):
        docs = [make_document(f"d{i}", "nothing here") for i in range(995)]
        docs += [make_document(f"h{i}", f"what a libtard thing {i}") for i in range(5)]
        corpus = Corpus.build(docs)
        pool = seed_label(corpus, seed_lexicon())
        assert len(pool) == 5
        assert all(e.source == "seed" and e.iteration == 0 for e in pool.entries.values())

    def test_plural_form_matches(self):
        corpus = Corpus.build([make_document("x", "they are subhumans !")])
        assert len(seed_label(corpus, seed_lexicon())) == 1

    def test_no_hits_empty_pool_and_run_errors(self):
        corpus = Corpus.build([make_document("a", "benign text")])
        assert len(seed_label(corpus, seed_lexicon())) == 0
        with pytest.raises(ValueError, match="seed"):
            run(corpus, BootstrapConfig(mode="slur_only"))


@pytest.fixture(scope="module")
def two_path_result(mini_world):
    cfg = mini_bootstrap_config(validation=mini_world["validation"])
    return run(mini_world["corpus"], cfg, mini_world["table"])


class TestRunMechanics:
    def test_iteration_accounting(self, two_path_result):
        logs = two_path_result.logs
        assert logs, "run produced no iterations"
        for log in logs:
            assert log.pool_size_after == (
                log.pool_size_before + log.new_by_slur + log.new_by_lstm - log.overlap
            )

    def test_pool_monotone(self, two_path_result):
        sizes = [two_path_result.logs[0].pool_size_before]
        sizes += [log.pool_size_after for log in two_path_result.logs]
        assert all(b >= a for a, b in zip(sizes, sizes[1:]))

    def test_union_accounting_totals(self, two_path_result):
        logs = two_path_result.logs
        seed_count = logs[0].pool_size_before
        total = seed_count + sum(l.new_by_slur + l.new_by_lstm - l.overlap for l in logs)
        assert total == len(two_path_result.pool)

    def test_sources_and_iterations_recorded(self, two_path_result):
        pool = two_path_result.pool
        assert pool.count_by_source("seed") == two_path_result.logs[0].pool_size_before
        by_iter = {}
        for entry in pool.entries.values():
            by_iter.setdefault(entry.iteration, 0)
            assert entry.source in ("seed", "slur", "lstm")
            if entry.source == "lstm":
                assert entry.score is not None and entry.score >= 0.9

    def test_learning_happened(self, two_path_result, mini_world):
        planted = set(mini_world["synth"].planted_slurs)
        assert two_path_result.lexicon.learned_terms() & planted
        assert two_path_result.pool.count_by_source("slur") > 0
        assert two_path_result.pool.count_by_source("lstm") > 0

    def test_overlap_attributed_to_slur_path(self, two_path_result):
        both = two_path_result.slur_found & two_path_result.lstm_found
        assert both, "fixture should produce dual-found documents"
        pool = two_path_result.pool
        assert all(pool.entries[i].source == "slur" for i in both if i in pool)

    def test_determinism(self, two_path_result, mini_world):
        cfg = mini_bootstrap_config(validation=mini_world["validation"])
        again = run(mini_world["corpus"], cfg, mini_world["table"])
        assert again.pool == two_path_result.pool
        assert again.lexicon.terms() == two_path_result.lexicon.terms()
        assert again.logs == two_path_result.logs

    def test_ablation_containment_at_iteration_one(self, mini_world):
        slur_cfg = mini_bootstrap_config(mode="slur_only", max_iterations=1)
        two_cfg = mini_bootstrap_config(max_iterations=1, validation=None)
        slur_res = run(mini_world["corpus"], slur_cfg)
        two_res = run(mini_world["corpus"], two_cfg, mini_world["table"])
        assert slur_res.pool.ids() <= two_res.pool.ids()

    def test_slur_only_skips_classifier(self, mini_world):
        cfg = mini_bootstrap_config(mode="slur_only")
        res = run(mini_world["corpus"], cfg)
        assert res.model is None
        assert res.lstm_found == set()
        assert all(log.validation_precision is None for log in res.logs)

    def test_lstm_only_skips_lexicon(self, mini_world):
        cfg = mini_bootstrap_config(mode="lstm_only", max_iterations=1,
                                    validation=mini_world["validation"])
        res = run(mini_world["corpus"], cfg, mini_world["table"])
        assert res.lexicon.learned_terms() == set()
        assert all(log.new_by_slur == 0 for log in res.logs)

    def test_no_additions_stop(self, mini_world):
        cfg = mini_bootstrap_config(mode="slur_only", ratio_threshold=1e9)
        res = run(mini_world["corpus"], cfg)
        assert res.stop_reason == "no_additions"
        assert len(res.logs) == 1
        assert len(res.pool) == res.logs[0].pool_size_before

    def test_lstm_mode_requires_table(self, mini_world):
        with pytest.raises(ValueError, match="embedding"):
            run(mini_world["corpus"], mini_bootstrap_config(mode="lstm_only"))

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            run(Corpus(), BootstrapConfig(mode="slur_only"))

    def test_bad_mode_rejected(self):
        with pytest.raises(ValueError):
            BootstrapConfig(mode="three_path")


class TestSegmentCounts:
    def test_reference_additivity(self):
        slur_ids = {f"s{i}" for i in range(261_183)}
        lstm_ids = {f"s{i}" for i in range(234_584)} | {f"l{i}" for i in range(248_714)}
        inter, lstm_only, slur_only = segment_counts(slur_ids, lstm_ids)
        assert inter == 234_584
        assert lstm_only == 248_714
        assert slur_only == 26_599
        assert inter + lstm_only == 483_298
        assert inter + slur_only == 261_183
        assert inter + lstm_only + slur_only == 509_897

    def test_disjoint_pools(self):
        assert segment_counts({"a"}, {"b", "c"}) == (0, 2, 1)

    def test_accepts_label_pools(self):
        a, b = LabelPool(), LabelPool()
        a.add("x", "slur", 1)
        a.add("y", "slur", 1)
        b.add("y", "lstm", 1)
        assert segment_counts(a, b) == (1, 0, 1)

    def test_random_pairs_additivity(self):
        rng = np.random.Generator(np.random.PCG64(8))
        universe = [f"d{i}" for i in range(2000)]
        for _ in range(100):
            slur_ids = {universe[int(i)] for i in rng.integers(0, 2000, size=rng.integers(0, 400))}
            lstm_ids = {universe[int(i)] for i in rng.integers(0, 2000, size=rng.integers(0, 400))}
            inter, lstm_only, slur_only = segment_counts(slur_ids, lstm_ids)
            assert inter + lstm_only == len(lstm_ids)
            assert inter + slur_only == len(slur_ids)
            assert inter + lstm_only + slur_only == len(slur_ids | lstm_ids)


class TestManifestAndSnapshots:
    def test_snapshots_written(self, mini_world, tmp_path):
        cfg = mini_bootstrap_config(max_iterations=1, validation=None)
        res = run(mini_world["corpus"], cfg, mini_world["table"],
                  snapshot_dir=str(tmp_path))
        assert (tmp_path / "iter_01_pool.jsonl").exists()
        assert (tmp_path / "iter_01_lexicon.tsv").exists()
        assert (tmp_path / "iter_01_model.bin").exists()
        assert res.snapshot_paths

    def test_manifest_contents_and_determinism(self, mini_world, tmp_path):
        cfg = mini_bootstrap_config(max_iterations=1, validation=None)
        res = run(mini_world["corpus"], cfg, mini_world["table"])
        path = tmp_path / "manifest.json"
        write_manifest(res, cfg, str(path))
        first = path.read_bytes()
        payload = json.loads(first)
        assert payload["config"]["mode"] == "two_path"
        assert len(payload["iterations"]) == len(res.logs)
        assert payload["stop"]["reason"] == res.stop_reason
        res2 = run(mini_world["corpus"], cfg, mini_world["table"])
        write_manifest(res2, cfg, str(path))
        assert path.read_bytes() == first


class TestValidationCsv:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "val.csv"
        path.write_text('id,text,label\nv1,"some, text",1\nv2,other,0\n')
        rows = load_validation_csv(str(path))
        assert rows == [("v1", "some, text", 1), ("v2", "other", 0)]

    def test_missing_label_rejected(self, tmp_path):
        path = tmp_path / "val.csv"
        path.write_text("id,text,label\nv1,text,\n")
        with pytest.raises(ValueError, match="line 2"):
            load_validation_csv(str(path))

    def test_empty_rejected(self, tmp_path):
        path = tmp_path / "val.csv"
        path.write_text("id,text,label\n")
        with pytest.raises(ValueError, match="empty"):
            load_validation_csv(str(path))
