"""From-scratch LSTM binary classifier with swappable recurrence kernels."""

from .backend import BACKEND, backward_batch, forward_batch
from .model import (
    LstmModel,
    SequenceIndexer,
    TrainConfig,
    TrainStats,
    backward,
    finite_difference_gradients,
    forward,
    gradient_check,
    init_model,
    load_model,
    loss,
    mean_loss,
    predict_batch,
    predict_scores,
    save_model,
    train,
)

__all__ = [
    "BACKEND",
    "LstmModel",
    "SequenceIndexer",
    "TrainConfig",
    "TrainStats",
    "backward",
    "backward_batch",
    "finite_difference_gradients",
    "forward",
    "forward_batch",
    "gradient_check",
    "init_model",
    "load_model",
    "loss",
    "mean_loss",
    "predict_batch",
    "predict_scores",
    "save_model",
    "train",
]
