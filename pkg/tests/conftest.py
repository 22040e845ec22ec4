import pytest

from hatebootstrap import engine, synth
from hatebootstrap.corpus import ingest
from hatebootstrap.embedding import load_embeddings
from hatebootstrap.neuralnet import TrainConfig
from hatebootstrap.synth import load_truth


MINI_SYNTH = dict(
    n_docs=3000,
    n_planted_slurs=3,
    n_patterns=2,
    seed=5,
    n_seed_docs=60,
    slur_seed_quota=12,
    slur_extra_quota=10,
    pattern_seed_quota=25,
    pattern_extra_quota=30,
    n_weak_slurs=1,
    n_weak_seeds=4,
    vocab_size=300,
    embed_dim=8,
    n_validation=60,
    n_validation_hateful=20,
)

# Corpus-size-aware thresholds: the mini corpus is ~3k docs, so the planted
# relative-frequency ratios land near 27 rather than the production 100.
MINI_RATIO_THRESHOLD = 20.0


def mini_train_config(**overrides):
    base = dict(hidden_size=16, max_len=12, batch_size=32, learning_rate=0.5)
    base.update(overrides)
    return TrainConfig(**base)


def mini_bootstrap_config(mode="two_path", validation=None, **overrides):
    base = dict(
        mode=mode,
        max_iterations=3,
        ratio_threshold=MINI_RATIO_THRESHOLD,
        train=mini_train_config(),
        rng_seed=3,
        validation=validation,
    )
    base.update(overrides)
    return engine.BootstrapConfig(**base)


@pytest.fixture(scope="session")
def mini_world(tmp_path_factory):
    out = tmp_path_factory.mktemp("mini_world")
    result = synth.generate(synth.SynthConfig(**MINI_SYNTH), str(out))
    return {
        "synth": result,
        "corpus": ingest(result.corpus_path),
        "table": load_embeddings(result.embeddings_path),
        "truth": load_truth(result.truth_path),
        "validation": engine.load_validation_csv(result.validation_path),
        "out_dir": str(out),
    }
