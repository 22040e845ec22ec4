"""Weakly supervised two-path bootstrapping for hate speech labeling.

Starting from a small seed slur lexicon, an explicit term learner and an
implicit LSTM classifier label a large unlabeled corpus together, each
iteration feeding the other's finds back into the shared pool.
"""

__version__ = "0.1.0"

from . import analysis, corpus, embedding, engine, evaluation, lexicon, neuralnet, pool, synth

__all__ = [
    "analysis",
    "corpus",
    "embedding",
    "engine",
    "evaluation",
    "lexicon",
    "neuralnet",
    "pool",
    "synth",
]
