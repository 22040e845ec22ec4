"""Single-layer LSTM binary classifier trained with minibatch SGD.

Parameters live in plain numpy arrays; the recurrence kernels come from the
compiled backend when available (see ``backend.py``). Training uses weighted
binary cross-entropy, variational dropout (one input mask and one recurrent
mask per sequence), gradient clipping at a global norm, and a fixed learning
rate. All randomness derives from the model's rng seed.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.special import expit as _sigmoid

from ..corpus import Document
from ..embedding import EmbeddingTable
from .backend import backward_batch, forward_batch

PROB_CLAMP = 1e-7
INIT_SCALE = 0.08
_CKPT_MAGIC = b"HBLSTM01"


@dataclass
class TrainConfig:
    epochs: int = 10
    input_dropout: float = 0.2
    recurrent_dropout: float = 0.2
    neg_pos_ratio: int = 10
    pos_class_weight: Optional[float] = None  # defaults to neg_pos_ratio
    learning_rate: float = 0.05
    batch_size: int = 32
    confidence_threshold: float = 0.9
    hidden_size: int = 100
    max_len: int = 50
    clip_norm: float = 5.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.input_dropout < 1.0 and 0.0 <= self.recurrent_dropout < 1.0):
            raise ValueError("dropout rates must be in [0, 1)")
        if not (0.0 < self.confidence_threshold < 1.0):
            raise ValueError("confidence_threshold must be in (0, 1)")
        if self.pos_class_weight is None:
            self.pos_class_weight = float(self.neg_pos_ratio)


@dataclass
class LstmModel:
    hidden_size: int
    input_size: int
    W: np.ndarray  # (4H, d) input-to-hidden, gates stacked [i, f, g, o]
    U: np.ndarray  # (4H, H) hidden-to-hidden
    b: np.ndarray  # (4H,)
    w_out: np.ndarray  # (H,)
    b_out: np.ndarray  # (1,)
    rng_seed: int

    def param_items(self) -> list[tuple[str, np.ndarray]]:
        return [("W", self.W), ("U", self.U), ("b", self.b),
                ("w_out", self.w_out), ("b_out", self.b_out)]

    def copy(self) -> "LstmModel":
        return LstmModel(
            hidden_size=self.hidden_size,
            input_size=self.input_size,
            W=self.W.copy(), U=self.U.copy(), b=self.b.copy(),
            w_out=self.w_out.copy(), b_out=self.b_out.copy(),
            rng_seed=self.rng_seed,
        )


@dataclass
class TrainStats:
    n_positives: int
    n_negatives: int
    epoch_losses: list[float] = field(default_factory=list)


def init_model(seed: int, input_size: int, hidden_size: int) -> LstmModel:
    """Deterministic initialization: uniform [-0.08, 0.08], forget-gate bias 1."""
    if input_size <= 0 or hidden_size <= 0:
        raise ValueError("sizes must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    H, d = hidden_size, input_size
    W = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(4 * H, d))
    U = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(4 * H, H))
    b = rng.uniform(-INIT_SCALE, INIT_SCALE, size=4 * H)
    b[H : 2 * H] = 1.0
    w_out = rng.uniform(-INIT_SCALE, INIT_SCALE, size=H)
    b_out = rng.uniform(-INIT_SCALE, INIT_SCALE, size=1)
    return LstmModel(hidden_size=H, input_size=d, W=W, U=U, b=b,
                     w_out=w_out, b_out=b_out, rng_seed=seed)


def forward(model: LstmModel, matrix: np.ndarray, length: int) -> float:
    """Score one pre-padded embedded sequence; dropout disabled."""
    if matrix.ndim != 2 or matrix.shape[1] != model.input_size:
        raise ValueError("input dimension does not match model.input_size")
    if not np.isfinite(matrix).all():
        raise ValueError("non-finite values in input")
    X = np.ascontiguousarray(matrix[None, :, :], dtype=np.float64)
    lengths = np.array([length], dtype=np.int64)
    probs, _, _ = forward_batch(
        X, lengths,
        np.ones((1, model.input_size)), np.ones((1, model.hidden_size)),
        model.W, model.U, model.b, model.w_out, float(model.b_out[0]),
    )
    return float(probs[0])


def loss(prediction: float, label: int, pos_weight: float = 1.0) -> float:
    """Weighted binary cross-entropy with probability clamp for log stability."""
    p = min(max(prediction, PROB_CLAMP), 1.0 - PROB_CLAMP)
    return -(pos_weight * label * np.log(p) + (1 - label) * np.log(1.0 - p))


def _batch_losses(probs: np.ndarray, labels: np.ndarray, pos_weight: float) -> np.ndarray:
    p = np.clip(probs, PROB_CLAMP, 1.0 - PROB_CLAMP)
    return -(pos_weight * labels * np.log(p) + (1.0 - labels) * np.log(1.0 - p))


def _dlogits_mean_loss(probs: np.ndarray, labels: np.ndarray, pos_weight: float) -> np.ndarray:
    # Gradient of the mean batch loss wrt the head logits; zero where the
    # probability clamp is pinned (the loss is locally flat there).
    interior = (probs > PROB_CLAMP) & (probs < 1.0 - PROB_CLAMP)
    d = (1.0 - labels) * probs - pos_weight * labels * (1.0 - probs)
    return np.where(interior, d, 0.0) / probs.shape[0]


def backward(model: LstmModel, X: np.ndarray, lengths: np.ndarray, labels: np.ndarray,
             pos_weight: float = 1.0,
             in_mask: Optional[np.ndarray] = None,
             rec_mask: Optional[np.ndarray] = None) -> dict[str, np.ndarray]:
    """Exact analytic gradients of the mean batch loss for every parameter."""
    B = X.shape[0]
    if B == 0:
        raise ValueError("batch is empty")
    if in_mask is None:
        in_mask = np.ones((B, model.input_size))
    if rec_mask is None:
        rec_mask = np.ones((B, model.hidden_size))
    probs, _, cache = forward_batch(
        X, lengths, in_mask, rec_mask,
        model.W, model.U, model.b, model.w_out, float(model.b_out[0]),
    )
    dlogits = _dlogits_mean_loss(probs, labels, pos_weight)
    dW, dU, db, dw_out, db_out = backward_batch(cache, model.W, model.U, model.w_out, dlogits)
    grads = {"W": dW, "U": dU, "b": db, "w_out": dw_out, "b_out": np.array([db_out])}
    for name, g in grads.items():
        if not np.isfinite(g).all():
            raise FloatingPointError(f"non-finite gradient in parameter {name}")
    return grads


def mean_loss(model: LstmModel, X: np.ndarray, lengths: np.ndarray, labels: np.ndarray,
              pos_weight: float = 1.0,
              in_mask: Optional[np.ndarray] = None,
              rec_mask: Optional[np.ndarray] = None) -> float:
    B = X.shape[0]
    if in_mask is None:
        in_mask = np.ones((B, model.input_size))
    if rec_mask is None:
        rec_mask = np.ones((B, model.hidden_size))
    probs, _, _ = forward_batch(
        X, lengths, in_mask, rec_mask,
        model.W, model.U, model.b, model.w_out, float(model.b_out[0]),
    )
    return float(_batch_losses(probs, labels, pos_weight).mean())


class SequenceIndexer:
    """Precomputed token-row lookup so batches embed via one fancy index.

    Row 0 of the matrix is the zero vector shared by padding and OOV tokens.
    """

    def __init__(self, table: EmbeddingTable, max_len: int):
        if max_len <= 0:
            raise ValueError("max_len must be positive")
        self.max_len = max_len
        self.dimension = table.dimension
        words = list(table.vectors)
        self.token_row = {w: i + 1 for i, w in enumerate(words)}
        self.matrix = np.zeros((len(words) + 1, table.dimension))
        for i, w in enumerate(words):
            self.matrix[i + 1] = table.vectors[w]

    def encode(self, tokens: Sequence[str]) -> tuple[np.ndarray, int]:
        kept = tokens[: self.max_len]
        row = np.zeros(self.max_len, dtype=np.int32)
        offset = self.max_len - len(kept)
        for i, tok in enumerate(kept):
            row[offset + i] = self.token_row.get(tok, 0)
        return row, len(kept)

    def encode_docs(self, docs: Sequence[Document]) -> tuple[np.ndarray, np.ndarray]:
        ids = np.zeros((len(docs), self.max_len), dtype=np.int32)
        lengths = np.zeros(len(docs), dtype=np.int64)
        for k, doc in enumerate(docs):
            ids[k], lengths[k] = self.encode(doc.tokens)
        return ids, lengths

    def batch_inputs(self, ids: np.ndarray) -> np.ndarray:
        return self.matrix[ids]


def _clip_gradients(grads: dict[str, np.ndarray], clip_norm: float) -> None:
    total = np.sqrt(sum(float((g * g).sum()) for g in grads.values()))
    if clip_norm > 0 and total > clip_norm:
        scale = clip_norm / total
        for g in grads.values():
            g *= scale


def _dropout_masks(rng: np.random.Generator, B: int, model: LstmModel,
                   cfg: TrainConfig) -> tuple[np.ndarray, np.ndarray]:
    if cfg.input_dropout > 0.0:
        keep = 1.0 - cfg.input_dropout
        in_mask = (rng.random((B, model.input_size)) < keep) / keep
    else:
        in_mask = np.ones((B, model.input_size))
    if cfg.recurrent_dropout > 0.0:
        keep = 1.0 - cfg.recurrent_dropout
        rec_mask = (rng.random((B, model.hidden_size)) < keep) / keep
    else:
        rec_mask = np.ones((B, model.hidden_size))
    return in_mask, rec_mask


def train(model: LstmModel, positives: Sequence[Document], negatives: Sequence[Document],
          cfg: TrainConfig, table: EmbeddingTable) -> tuple[LstmModel, TrainStats]:
    """Train in place on the pool positives plus sampled negatives.

    Exactly ``neg_pos_ratio * len(positives)`` negatives are drawn without
    replacement from the candidates. Deterministic given the model's rng
    seed. Returns the model together with per-epoch training statistics.
    """
    if len(positives) == 0:
        raise ValueError("positives must be non-empty")
    n_neg = cfg.neg_pos_ratio * len(positives)
    if len(negatives) < n_neg:
        raise ValueError(
            f"need {n_neg} negative candidates, only {len(negatives)} available"
        )
    seeds = np.random.SeedSequence(model.rng_seed).spawn(3)
    sample_rng = np.random.Generator(np.random.PCG64(seeds[0]))
    shuffle_rng = np.random.Generator(np.random.PCG64(seeds[1]))
    dropout_rng = np.random.Generator(np.random.PCG64(seeds[2]))

    neg_idx = sample_rng.choice(len(negatives), size=n_neg, replace=False)
    sampled = [negatives[int(i)] for i in neg_idx]

    indexer = SequenceIndexer(table, cfg.max_len)
    docs = list(positives) + sampled
    ids, lengths = indexer.encode_docs(docs)
    labels = np.concatenate([np.ones(len(positives)), np.zeros(n_neg)])

    stats = TrainStats(n_positives=len(positives), n_negatives=n_neg)
    n = len(docs)
    for _ in range(cfg.epochs):
        perm = shuffle_rng.permutation(n)
        loss_sum = 0.0
        for start in range(0, n, cfg.batch_size):
            sel = perm[start : start + cfg.batch_size]
            X = indexer.batch_inputs(ids[sel])
            y = labels[sel]
            in_mask, rec_mask = _dropout_masks(dropout_rng, len(sel), model, cfg)
            probs, _, cache = forward_batch(
                X, lengths[sel], in_mask, rec_mask,
                model.W, model.U, model.b, model.w_out, float(model.b_out[0]),
            )
            loss_sum += float(_batch_losses(probs, y, cfg.pos_class_weight).sum())
            dlogits = _dlogits_mean_loss(probs, y, cfg.pos_class_weight)
            dW, dU, db, dw_out, db_out = backward_batch(
                cache, model.W, model.U, model.w_out, dlogits
            )
            grads = {"W": dW, "U": dU, "b": db, "w_out": dw_out,
                     "b_out": np.array([db_out])}
            for name, g in grads.items():
                if not np.isfinite(g).all():
                    raise FloatingPointError(f"non-finite gradient in parameter {name}")
            _clip_gradients(grads, cfg.clip_norm)
            for name, param in model.param_items():
                param -= cfg.learning_rate * grads[name]
        stats.epoch_losses.append(loss_sum / n)
    return model, stats


def predict_scores(model: LstmModel, ids: np.ndarray, lengths: np.ndarray,
                   indexer: SequenceIndexer, batch_size: int = 512) -> np.ndarray:
    """Dropout-free scores for already-encoded sequences."""
    out = np.zeros(len(ids))
    ones_in = np.ones((1, model.input_size))
    ones_rec = np.ones((1, model.hidden_size))
    for start in range(0, len(ids), batch_size):
        chunk = slice(start, start + batch_size)
        X = indexer.batch_inputs(ids[chunk])
        B = X.shape[0]
        probs, _, _ = forward_batch(
            X, lengths[chunk],
            np.broadcast_to(ones_in, (B, model.input_size)).copy(),
            np.broadcast_to(ones_rec, (B, model.hidden_size)).copy(),
            model.W, model.U, model.b, model.w_out, float(model.b_out[0]),
        )
        out[chunk] = probs
    return out


def predict_batch(model: LstmModel, docs: Sequence[Document], table: EmbeddingTable,
                  threshold: float, max_len: int = 50,
                  batch_size: int = 512) -> list[tuple[str, float]]:
    """(doc id, score) for documents scoring at or above the threshold,
    sorted by descending score (ties by id)."""
    docs = list(docs)
    if not docs:
        return []
    indexer = SequenceIndexer(table, max_len)
    ids, lengths = indexer.encode_docs(docs)
    scores = predict_scores(model, ids, lengths, indexer, batch_size)
    hits = [(doc.id, float(s)) for doc, s in zip(docs, scores) if s >= threshold]
    hits.sort(key=lambda pair: (-pair[1], pair[0]))
    return hits


def save_model(model: LstmModel, path: str) -> None:
    """Versioned binary checkpoint; little-endian float64 tensors."""
    header = json.dumps(
        {
            "hidden_size": model.hidden_size,
            "input_size": model.input_size,
            "rng_seed": model.rng_seed,
        },
        sort_keys=True,
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_CKPT_MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        for _, param in model.param_items():
            fh.write(np.ascontiguousarray(param, dtype="<f8").tobytes())


def load_model(path: str) -> LstmModel:
    with open(path, "rb") as fh:
        magic = fh.read(len(_CKPT_MAGIC))
        if magic != _CKPT_MAGIC:
            raise ValueError("not a model checkpoint (bad magic)")
        (header_len,) = struct.unpack("<I", fh.read(4))
        meta = json.loads(fh.read(header_len).decode("utf-8"))
        H, d = meta["hidden_size"], meta["input_size"]

        def read_array(shape):
            count = int(np.prod(shape))
            buf = fh.read(count * 8)
            if len(buf) != count * 8:
                raise ValueError("truncated checkpoint")
            return np.frombuffer(buf, dtype="<f8").reshape(shape).copy()

        model = LstmModel(
            hidden_size=H,
            input_size=d,
            W=read_array((4 * H, d)),
            U=read_array((4 * H, H)),
            b=read_array((4 * H,)),
            w_out=read_array((H,)),
            b_out=read_array((1,)),
            rng_seed=meta["rng_seed"],
        )
        if fh.read(1):
            raise ValueError("trailing bytes in checkpoint")
        return model


def flatten_params(model: LstmModel) -> np.ndarray:
    return np.concatenate([p.ravel() for _, p in model.param_items()])


def set_params_from_flat(model: LstmModel, flat: np.ndarray) -> None:
    pos = 0
    for _, p in model.param_items():
        p.flat[:] = flat[pos : pos + p.size]
        pos += p.size


def finite_difference_gradients(model: LstmModel, X: np.ndarray, lengths: np.ndarray,
                                labels: np.ndarray, pos_weight: float,
                                step: float = 1e-5,
                                in_mask: Optional[np.ndarray] = None,
                                rec_mask: Optional[np.ndarray] = None) -> np.ndarray:
    """Central-difference gradient of the mean batch loss over all parameters.

    Independent oracle for ``backward``: evaluates the forward loss only.
    Fixed dropout masks may be supplied to check mask-conditioned gradients.
    """
    base = flatten_params(model)
    grad = np.zeros_like(base)
    probe = model.copy()
    for k in range(base.size):
        delta = np.zeros_like(base)
        delta[k] = step
        set_params_from_flat(probe, base + delta)
        up = mean_loss(probe, X, lengths, labels, pos_weight, in_mask, rec_mask)
        set_params_from_flat(probe, base - delta)
        down = mean_loss(probe, X, lengths, labels, pos_weight, in_mask, rec_mask)
        grad[k] = (up - down) / (2.0 * step)
    return grad


def gradient_check(seed: int, hidden_size: int = 3, input_size: int = 2,
                   seq_len: int = 4, batch: int = 3, pos_weight: float = 3.0,
                   step: float = 1e-5) -> float:
    """Max relative error between analytic BPTT gradients and the
    finite-difference oracle on one random configuration (dropout off).

    The denominator is floored at 1e-5: central differences at this step
    cannot certify a relative error on smaller elements (their roundoff
    floor is ~1e-11 absolute), so those are held to 1e-9 absolute instead.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    model = init_model(seed, input_size, hidden_size)
    X = rng.normal(0.0, 1.0, size=(batch, seq_len, input_size))
    lengths = rng.integers(0, seq_len + 1, size=batch).astype(np.int64)
    if lengths.max() == 0:
        lengths[0] = seq_len
    labels = rng.integers(0, 2, size=batch).astype(np.float64)

    analytic = backward(model, X, lengths, labels, pos_weight)
    flat_analytic = np.concatenate([analytic[name].ravel() for name, _ in model.param_items()])
    flat_fd = finite_difference_gradients(model, X, lengths, labels, pos_weight, step)

    scale = np.maximum(np.abs(flat_analytic), np.abs(flat_fd))
    err = np.abs(flat_analytic - flat_fd)
    rel = err / np.maximum(scale, 1e-5)
    return float(rel.max())
