import json

import pytest

from conftest import MINI_RATIO_THRESHOLD
from hatebootstrap.cli import main


class TestEvaluateEstimate:
    def test_prints_reference_row(self, capsys):
        rc = main(["evaluate", "estimate", "--n", "419", "--k", "1000",
                   "--tagged", "483298", "--corpus-size", "62000000"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "precision 0.419 recall 0.544 f1 0.474" in out

    def test_union_row(self, capsys):
        rc = main(["evaluate", "estimate", "--n", "422", "--tagged", "509897",
                   "--corpus-size", "62000000"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "precision 0.422 recall 0.578 f1 0.488" in out

    def test_invalid_counts_exit_one(self, capsys):
        rc = main(["evaluate", "estimate", "--n", "1001", "--k", "1000",
                   "--tagged", "10", "--corpus-size", "100"])
        assert rc == 1
        assert "error:" in capsys.readouterr().err


class TestUsageErrors:
    def test_missing_required_flag_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["evaluate", "estimate", "--n", "1"])
        assert exc.value.code == 2

    def test_unknown_command_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2


class TestSynthCommand:
    def test_deterministic_output(self, tmp_path, capsys):
        a, b = tmp_path / "a", tmp_path / "b"
        args = ["synth", "--docs", "2000", "--planted-slurs", "2",
                "--implicit-patterns", "1", "--seed", "7", "--embed-dim", "8"]
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        for name in ("corpus.jsonl", "embeddings.txt", "truth.csv", "validation.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_different_seed_differs(self, tmp_path, capsys):
        a, b = tmp_path / "a", tmp_path / "b"
        base = ["synth", "--docs", "2000", "--planted-slurs", "2",
                "--implicit-patterns", "1", "--embed-dim", "8"]
        assert main(base + ["--seed", "7", "--out", str(a)]) == 0
        assert main(base + ["--seed", "8", "--out", str(b)]) == 0
        assert (a / "corpus.jsonl").read_bytes() != (b / "corpus.jsonl").read_bytes()


class TestIngestCommand:
    def test_reports_counts(self, tmp_path, capsys):
        path = tmp_path / "c.jsonl"
        path.write_text('{"id": "a", "text": "hello"}\n{"id": "b"}\n')
        rc = main(["ingest", "--input", str(path)])
        out = capsys.readouterr().out
        assert rc == 0
        assert "documents 1" in out and "dropped 1" in out

    def test_missing_file_exits_one(self, tmp_path, capsys):
        rc = main(["ingest", "--input", str(tmp_path / "nope.jsonl")])
        assert rc == 1


class TestGradcheckCommand:
    def test_passes(self, capsys):
        rc = main(["gradcheck", "--trials", "3", "--seed", "1"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "PASS" in out


def write_run_config(path, mini_world, out_dir, **overrides):
    cfg = {
        "corpus": mini_world["synth"].corpus_path,
        "embeddings": mini_world["synth"].embeddings_path,
        "validation": mini_world["synth"].validation_path,
        "mode": "two_path",
        "max_iterations": 2,
        "ratio_threshold": MINI_RATIO_THRESHOLD,
        "rng_seed": 3,
        "out_dir": str(out_dir),
        "train": {"hidden_size": 16, "max_len": 12, "batch_size": 32,
                  "learning_rate": 0.5},
    }
    cfg.update(overrides)
    path.write_text(json.dumps(cfg))
    return cfg


class TestBootstrapCommand:
    def test_end_to_end_with_manifest(self, mini_world, tmp_path, capsys):
        out_dir = tmp_path / "run"
        config = tmp_path / "run.json"
        write_run_config(config, mini_world, out_dir)
        rc = main(["bootstrap", "--config", str(config)])
        assert rc == 0
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert manifest["config"]["mode"] == "two_path"
        assert manifest["iterations"]
        assert (out_dir / "final_pool.jsonl").exists()
        assert (out_dir / "final_lexicon.tsv").exists()
        assert (out_dir / "final_model.bin").exists()
        assert (out_dir / "iter_01_pool.jsonl").exists()
        seg = manifest["segments"]
        assert seg["intersection"] + seg["lstm_only"] >= 0

    def test_manifest_byte_identical_across_runs(self, mini_world, tmp_path, capsys):
        out_dir = tmp_path / "run"
        config = tmp_path / "run.json"
        write_run_config(config, mini_world, out_dir)
        assert main(["bootstrap", "--config", str(config)]) == 0
        first = (out_dir / "manifest.json").read_bytes()
        assert main(["bootstrap", "--config", str(config)]) == 0
        assert (out_dir / "manifest.json").read_bytes() == first

    def test_mode_flag_overrides_config(self, mini_world, tmp_path, capsys):
        out_dir = tmp_path / "run"
        config = tmp_path / "run.json"
        write_run_config(config, mini_world, out_dir)
        rc = main(["bootstrap", "--config", str(config), "--mode", "slur_only"])
        assert rc == 0
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert manifest["config"]["mode"] == "slur_only"
        assert not (out_dir / "final_model.bin").exists()

    def test_unknown_config_key_exits_one(self, mini_world, tmp_path, capsys):
        out_dir = tmp_path / "run"
        config = tmp_path / "run.json"
        write_run_config(config, mini_world, out_dir, bogus_knob=1)
        rc = main(["bootstrap", "--config", str(config)])
        assert rc == 1
        assert "unknown config key" in capsys.readouterr().err

    def test_unknown_train_key_exits_one(self, mini_world, tmp_path, capsys):
        out_dir = tmp_path / "run"
        config = tmp_path / "run.json"
        write_run_config(config, mini_world, out_dir,
                         train={"optimizer": "adam"})
        rc = main(["bootstrap", "--config", str(config)])
        assert rc == 1


class TestEvaluateSampleAndAnalyze:
    @pytest.fixture()
    def run_outputs(self, mini_world, tmp_path):
        out_dir = tmp_path / "run"
        config = tmp_path / "run.json"
        write_run_config(config, mini_world, out_dir)
        assert main(["bootstrap", "--config", str(config)]) == 0
        return out_dir

    def test_sample_export(self, run_outputs, mini_world, tmp_path, capsys):
        out_csv = tmp_path / "sample.csv"
        rc = main(["evaluate", "sample",
                   "--pool", str(run_outputs / "final_pool.jsonl"),
                   "--corpus", mini_world["synth"].corpus_path,
                   "--k", "20", "--seed", "1", "--out", str(out_csv)])
        assert rc == 0
        lines = out_csv.read_text().splitlines()
        assert lines[0] == "id,text,label"
        assert len(lines) == 21

    def test_analyze_temporal(self, run_outputs, mini_world, tmp_path, capsys):
        out_csv = tmp_path / "temporal.csv"
        rc = main(["analyze", "temporal",
                   "--pool", str(run_outputs / "final_pool.jsonl"),
                   "--corpus", mini_world["synth"].corpus_path,
                   "--out", str(out_csv)])
        assert rc == 0
        assert out_csv.read_text().startswith("day,hateful,total,ratio")

    def test_analyze_top(self, run_outputs, mini_world, tmp_path, capsys):
        out_csv = tmp_path / "top.csv"
        rc = main(["analyze", "top",
                   "--pool", str(run_outputs / "final_pool.jsonl"),
                   "--corpus", mini_world["synth"].corpus_path,
                   "--field", "mentions", "--k", "5", "--out", str(out_csv)])
        assert rc == 0
        assert out_csv.read_text().startswith("rank,item,count")
