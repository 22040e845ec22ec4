"""Pretrained word-vector table: text-format loading and sequence embedding."""

from __future__ import annotations

import numpy as np


class EmbeddingTable:
    """token -> vector lookup with a zero vector for out-of-vocabulary tokens."""

    def __init__(self, dimension: int, vectors: dict[str, np.ndarray]):
        if dimension <= 0:
            raise ValueError("dimension must be positive")
        self.dimension = dimension
        self.vectors = vectors
        self.oov_vector = np.zeros(dimension, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def lookup(self, token: str) -> np.ndarray:
        return self.vectors.get(token, self.oov_vector)


def load_embeddings(path: str) -> EmbeddingTable:
    """Parse a textual vector file: optional ``<vocab> <dim>`` header, then
    ``word v1 ... vd`` per line. Inconsistent vector lengths are fatal,
    duplicate words keep their first occurrence."""
    vectors: dict[str, np.ndarray] = {}
    dimension = None
    declared_vocab = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2:
                try:
                    declared_vocab, dimension = int(parts[0]), int(parts[1])
                    if dimension <= 0:
                        raise ValueError
                    continue
                except ValueError:
                    declared_vocab, dimension = None, None
            word, values = parts[0], parts[1:]
            if not values:
                raise ValueError(f"line {lineno}: no vector values")
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError:
                raise ValueError(f"line {lineno}: non-numeric vector value") from None
            if dimension is None:
                dimension = len(vec)
            elif len(vec) != dimension:
                raise ValueError(
                    f"line {lineno}: vector length {len(vec)} != expected {dimension}"
                )
            if word not in vectors:
                vectors[word] = vec
    if dimension is None:
        raise ValueError("embedding file contains no vectors")
    if declared_vocab is not None and declared_vocab != len(vectors):
        raise ValueError(
            f"header declares {declared_vocab} words but file has {len(vectors)}"
        )
    return EmbeddingTable(dimension, vectors)


def save_embeddings(table: EmbeddingTable, path: str, header: bool = True) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(f"{len(table.vectors)} {table.dimension}\n")
        for word, vec in table.vectors.items():
            fh.write(word + " " + " ".join(repr(float(v)) for v in vec) + "\n")


def embed(tokens, table: EmbeddingTable, max_len: int = 50) -> tuple[np.ndarray, int]:
    """Map a token sequence to a (max_len, d) matrix plus its true length.

    Sequences longer than max_len keep their first max_len tokens; shorter
    ones are pre-padded with zero rows so the real tokens sit at the end.
    """
    if max_len <= 0:
        raise ValueError("max_len must be positive")
    kept = list(tokens)[:max_len]
    out = np.zeros((max_len, table.dimension), dtype=np.float64)
    offset = max_len - len(kept)
    for i, tok in enumerate(kept):
        out[offset + i] = table.lookup(tok)
    return out, len(kept)
