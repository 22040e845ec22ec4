import math

import numpy as np
import pytest

from hatebootstrap.corpus import Document
from hatebootstrap.embedding import EmbeddingTable
from hatebootstrap.neuralnet import (
    LstmModel,
    SequenceIndexer,
    TrainConfig,
    backward,
    finite_difference_gradients,
    forward,
    gradient_check,
    init_model,
    load_model,
    loss,
    mean_loss,
    predict_batch,
    save_model,
    train,
)
from hatebootstrap.neuralnet.model import flatten_params


def sig(x):
    return 1.0 / (1.0 + math.exp(-x))


class TestInit:
    def test_deterministic(self):
        a = init_model(42, 8, 4)
        b = init_model(42, 8, 4)
        for (_, pa), (_, pb) in zip(a.param_items(), b.param_items()):
            np.testing.assert_array_equal(pa, pb)

    def test_forget_gate_bias_is_one(self):
        m = init_model(42, 8, 4)
        np.testing.assert_array_equal(m.b[4:8], 1.0)

    def test_other_params_within_init_range(self):
        m = init_model(42, 8, 4)
        assert np.abs(m.W).max() <= 0.08
        assert np.abs(m.U).max() <= 0.08
        assert np.abs(m.w_out).max() <= 0.08

    def test_different_seeds_differ(self):
        a, b = init_model(42, 8, 4), init_model(43, 8, 4)
        assert not np.array_equal(a.W, b.W)

    def test_bad_sizes(self):
        with pytest.raises(ValueError):
            init_model(1, 0, 4)


class TestForward:
    def test_all_zero_parameters_give_half(self):
        m = init_model(1, 3, 2)
        for _, p in m.param_items():
            p[:] = 0.0
        X = np.random.default_rng(0).normal(size=(4, 3))
        assert forward(m, X, 4) == pytest.approx(0.5)

    def test_zero_length_gives_sigmoid_of_output_bias(self):
        m = init_model(7, 3, 2)
        X = np.zeros((4, 3))
        assert forward(m, X, 0) == pytest.approx(sig(m.b_out[0]))

    def test_one_step_recurrence_matches_hand_computation(self):
        # h=2, d=2, hand-set weights, single input step [1, 0]; the oracle
        # below evaluates the gate equations with plain scalar math.
        m = init_model(0, 2, 2)
        H = 2
        m.W[:] = 0.0
        m.U[:] = 0.0
        m.W[0, 0], m.W[1, 1] = 0.5, 0.5        # input gate
        m.W[2, 0], m.W[3, 1] = 0.3, 0.3        # forget gate
        m.W[4, 0], m.W[5, 1] = 1.0, 1.0        # candidate
        m.W[6, 0], m.W[7, 1] = 0.7, 0.7        # output gate
        m.b[:] = np.array([0.1, -0.1, 1.0, 1.0, 0.2, 0.2, 0.0, 0.5])
        m.w_out[:] = np.array([1.0, -1.0])
        m.b_out[:] = 0.25

        x = [1.0, 0.0]
        i = [sig(0.5 * x[0] + 0.1), sig(0.5 * x[1] - 0.1)]
        g = [math.tanh(1.0 * x[0] + 0.2), math.tanh(1.0 * x[1] + 0.2)]
        o = [sig(0.7 * x[0] + 0.0), sig(0.7 * x[1] + 0.5)]
        c = [i[0] * g[0], i[1] * g[1]]  # c_prev = 0, forget gate moot
        h = [o[0] * math.tanh(c[0]), o[1] * math.tanh(c[1])]
        expected = sig(1.0 * h[0] - 1.0 * h[1] + 0.25)

        X = np.array([x])
        assert forward(m, X, 1) == pytest.approx(expected, rel=1e-12)

    def test_non_finite_input_rejected(self):
        m = init_model(1, 2, 2)
        X = np.full((3, 2), np.nan)
        with pytest.raises(ValueError):
            forward(m, X, 3)

    def test_permutation_sensitive(self):
        m = init_model(3, 3, 4)
        rng = np.random.default_rng(3)
        X = rng.normal(size=(3, 3))
        fwd = forward(m, X, 3)
        rev = forward(m, X[::-1].copy(), 3)
        assert abs(fwd - rev) > 1e-9

    def test_padding_amount_invariance(self):
        m = init_model(5, 3, 4)
        rng = np.random.default_rng(5)
        body = rng.normal(size=(6, 3))
        X20 = np.vstack([np.zeros((14, 3)), body])
        X50 = np.vstack([np.zeros((44, 3)), body])
        assert forward(m, X20, 6) == pytest.approx(forward(m, X50, 6), abs=1e-14)


class TestLoss:
    def test_balanced_positive(self):
        assert loss(0.5, 1, 1.0) == pytest.approx(math.log(2))

    def test_weighted_positive(self):
        assert loss(0.5, 1, 10.0) == pytest.approx(10 * math.log(2))

    def test_weight_does_not_touch_negative_term(self):
        assert loss(0.5, 0, 10.0) == pytest.approx(math.log(2))
        assert loss(0.5, 0, 1.0) == pytest.approx(math.log(2))

    def test_clamp_keeps_loss_finite(self):
        assert np.isfinite(loss(0.0, 1, 1.0))
        assert np.isfinite(loss(1.0, 0, 1.0))


class TestBackward:
    def test_matches_finite_differences(self):
        for seed in range(3):
            err = gradient_check(seed, hidden_size=3, input_size=2, seq_len=4, batch=3)
            assert err <= 1e-4

    def test_exact_for_fixed_dropout_masks(self):
        rng = np.random.default_rng(9)
        m = init_model(9, 2, 3)
        B, T = 3, 4
        X = rng.normal(size=(B, T, 2))
        lengths = np.array([4, 2, 3], dtype=np.int64)
        labels = np.array([1.0, 0.0, 1.0])
        in_mask = (rng.random((B, 2)) < 0.8) / 0.8
        rec_mask = (rng.random((B, 3)) < 0.8) / 0.8
        grads = backward(m, X, lengths, labels, 3.0, in_mask, rec_mask)
        flat = np.concatenate([grads[n].ravel() for n, _ in m.param_items()])
        fd = finite_difference_gradients(m, X, lengths, labels, 3.0,
                                         in_mask=in_mask, rec_mask=rec_mask)
        scale = np.maximum(np.abs(flat), np.abs(fd))
        rel = np.abs(flat - fd) / np.maximum(scale, 1e-5)
        assert rel.max() <= 1e-4

    def test_zero_output_head_zeroes_gate_gradients(self):
        m = init_model(2, 2, 3)
        m.w_out[:] = 0.0
        rng = np.random.default_rng(2)
        X = rng.normal(size=(2, 3, 2))
        lengths = np.array([3, 3], dtype=np.int64)
        labels = np.array([1.0, 0.0])
        grads = backward(m, X, lengths, labels, 1.0)
        np.testing.assert_array_equal(grads["W"], 0.0)
        np.testing.assert_array_equal(grads["U"], 0.0)
        np.testing.assert_array_equal(grads["b"], 0.0)
        assert np.abs(grads["b_out"]).max() > 0

    def test_duplicated_example_same_mean_gradient(self):
        m = init_model(4, 2, 3)
        rng = np.random.default_rng(4)
        x = rng.normal(size=(1, 4, 2))
        grads1 = backward(m, x, np.array([4], dtype=np.int64), np.array([1.0]), 2.0)
        xx = np.concatenate([x, x])
        grads2 = backward(m, xx, np.array([4, 4], dtype=np.int64), np.array([1.0, 1.0]), 2.0)
        for name in grads1:
            np.testing.assert_allclose(grads1[name], grads2[name], rtol=1e-12, atol=1e-15)

    def test_empty_batch_rejected(self):
        m = init_model(1, 2, 2)
        with pytest.raises(ValueError):
            backward(m, np.zeros((0, 3, 2)), np.zeros(0, dtype=np.int64), np.zeros(0))


def separable_dataset():
    """Positives contain the marker token, negatives never do."""
    table = EmbeddingTable(
        4,
        {
            "marker": np.array([2.0, -2.0, 1.5, 1.0]),
            **{
                f"w{i}": np.array([0.2, 0.3, -0.1, 0.15]) * ((i % 5) - 2)
                for i in range(30)
            },
        },
    )
    rng = np.random.default_rng(11)
    positives = []
    for i in range(10):
        toks = [f"w{int(k)}" for k in rng.integers(0, 30, size=5)] + ["marker"]
        positives.append(Document(id=f"p{i}", raw_text="", tokens=tuple(toks)))
    negatives = []
    for i in range(130):
        toks = [f"w{int(k)}" for k in rng.integers(0, 30, size=6)]
        negatives.append(Document(id=f"n{i}", raw_text="", tokens=tuple(toks)))
    return table, positives, negatives


class TestTrain:
    def test_exact_negative_sample_count(self):
        table, positives, negatives = separable_dataset()
        cfg = TrainConfig(hidden_size=4, max_len=8, epochs=1)
        model = init_model(0, 4, 4)
        _, stats = train(model, positives, negatives, cfg, table)
        assert stats.n_positives == 10
        assert stats.n_negatives == 100

    def test_insufficient_negatives_rejected(self):
        table, positives, negatives = separable_dataset()
        cfg = TrainConfig(hidden_size=4, max_len=8, epochs=1)
        with pytest.raises(ValueError):
            train(init_model(0, 4, 4), positives, negatives[:99], cfg, table)

    def test_empty_positives_rejected(self):
        table, _, negatives = separable_dataset()
        cfg = TrainConfig(hidden_size=4, max_len=8, epochs=1)
        with pytest.raises(ValueError):
            train(init_model(0, 4, 4), [], negatives, cfg, table)

    def test_deterministic_given_seed(self):
        table, positives, negatives = separable_dataset()
        cfg = TrainConfig(hidden_size=4, max_len=8, epochs=3)
        m1, _ = train(init_model(5, 4, 4), positives, negatives, cfg, table)
        m2, _ = train(init_model(5, 4, 4), positives, negatives, cfg, table)
        assert np.array_equal(flatten_params(m1), flatten_params(m2))

    def test_separable_data_reaches_full_training_accuracy(self):
        table, positives, negatives = separable_dataset()
        cfg = TrainConfig(hidden_size=8, max_len=8, learning_rate=0.5, batch_size=16)
        model, stats = train(init_model(3, 4, 8), positives, negatives, cfg, table)
        scored = predict_batch(model, positives + negatives, table, threshold=0.0,
                               max_len=8)
        scores = dict(scored)
        pos_ok = all(scores[d.id] >= 0.5 for d in positives)
        sampled_against = {d.id for d in negatives}
        neg_ok = all(s < 0.5 for i, s in scores.items() if i in sampled_against)
        assert pos_ok and neg_ok

    def test_epoch_loss_non_increasing_without_dropout(self):
        table, positives, negatives = separable_dataset()
        cfg = TrainConfig(hidden_size=8, max_len=8, learning_rate=0.2, batch_size=16,
                          input_dropout=0.0, recurrent_dropout=0.0)
        _, stats = train(init_model(3, 4, 8), positives, negatives, cfg, table)
        losses = stats.epoch_losses
        assert len(losses) == 10
        assert all(losses[i + 1] <= losses[i] + 1e-9 for i in range(len(losses) - 1))


class TestPredictBatch:
    def trained(self):
        table, positives, negatives = separable_dataset()
        cfg = TrainConfig(hidden_size=8, max_len=8, learning_rate=0.5, batch_size=16)
        model, _ = train(init_model(3, 4, 8), positives, negatives, cfg, table)
        return table, positives, negatives, model

    def test_threshold_filters(self):
        table, positives, negatives, model = self.trained()
        hits = predict_batch(model, positives + negatives, table, threshold=0.9, max_len=8)
        ids = {i for i, _ in hits}
        assert ids == {d.id for d in positives}
        assert all(s >= 0.9 for _, s in hits)

    def test_empty_docs(self):
        table, _, _, model = self.trained()
        assert predict_batch(model, [], table, threshold=0.5) == []

    def test_threshold_zero_returns_all_sorted(self):
        table, positives, negatives, model = self.trained()
        docs = positives + negatives
        hits = predict_batch(model, docs, table, threshold=0.0, max_len=8)
        assert len(hits) == len(docs)
        scores = [s for _, s in hits]
        assert scores == sorted(scores, reverse=True)


class TestCheckpoint:
    def test_round_trip_bit_exact(self, tmp_path):
        table, positives, negatives = separable_dataset()
        cfg = TrainConfig(hidden_size=4, max_len=8, epochs=2)
        model, _ = train(init_model(9, 4, 4), positives, negatives, cfg, table)
        path = tmp_path / "model.bin"
        save_model(model, str(path))
        loaded = load_model(str(path))
        for (_, a), (_, b) in zip(model.param_items(), loaded.param_items()):
            np.testing.assert_array_equal(a, b)
        rng = np.random.default_rng(1)
        X = rng.normal(size=(6, 4))
        assert forward(model, X, 6) == forward(loaded, X, 6)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"NOTAMODEL")
        with pytest.raises(ValueError):
            load_model(str(path))


class TestBackendParity:
    def test_backends_agree(self):
        try:
            from hatebootstrap.neuralnet import _lstm_cy as cyk
        except ImportError:
            pytest.skip("compiled kernel not built")
        from hatebootstrap.neuralnet import _lstm_np as npk

        rng = np.random.default_rng(21)
        B, T, d, H = 5, 6, 4, 3
        X = rng.normal(size=(B, T, d))
        lengths = rng.integers(0, T + 1, size=B).astype(np.int64)
        im = (rng.random((B, d)) < 0.8) / 0.8
        rm = (rng.random((B, H)) < 0.8) / 0.8
        W = rng.normal(size=(4 * H, d))
        U = rng.normal(size=(4 * H, H))
        b = rng.normal(size=4 * H)
        wo = rng.normal(size=H)
        dl = rng.normal(size=B)

        p1, l1, c1 = npk.forward_batch(X, lengths, im, rm, W, U, b, wo, 0.3)
        p2, l2, c2 = cyk.forward_batch(X, lengths, im, rm, W, U, b, wo, 0.3)
        np.testing.assert_allclose(p1, p2, rtol=1e-12, atol=1e-14)
        g1 = npk.backward_batch(c1, W, U, wo, dl)
        g2 = cyk.backward_batch(c2, W, U, wo, dl)
        for a, b_ in zip(g1, g2):
            np.testing.assert_allclose(np.asarray(a), np.asarray(b_), rtol=1e-10, atol=1e-13)


class TestSequenceIndexer:
    def test_encode_matches_embed_semantics(self):
        table = EmbeddingTable(
            2, {"a": np.array([1.0, 2.0]), "b": np.array([3.0, 4.0])}
        )
        idx = SequenceIndexer(table, max_len=4)
        row, length = idx.encode(["a", "oov", "b"])
        assert length == 3
        X = idx.batch_inputs(row[None, :])
        np.testing.assert_array_equal(X[0, 0], 0.0)
        np.testing.assert_array_equal(X[0, 1], [1.0, 2.0])
        np.testing.assert_array_equal(X[0, 2], 0.0)
        np.testing.assert_array_equal(X[0, 3], [3.0, 4.0])
