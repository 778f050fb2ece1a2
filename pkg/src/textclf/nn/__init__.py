"""Minimal reverse-mode differentiable numeric core."""

from .tensor import Tensor, ShapeError, concat, matmul
from .layers import (
    conv1d,
    maxpool1d,
    global_maxpool,
    dense,
    relu,
    softmax,
    dropout,
    gaussian_noise,
    embedding_lookup,
    LstmParams,
    LstmState,
    init_lstm_params,
    lstm_step,
    lstm_forward,
)
from .losses import cross_entropy_loss, one_hot
from .optim import Adagrad, AdagradState, adagrad_update
from .gradcheck import finite_difference_check
from .checkpoint import save_checkpoint, load_checkpoint, FORMAT_VERSION

__all__ = [
    "Tensor",
    "ShapeError",
    "concat",
    "matmul",
    "conv1d",
    "maxpool1d",
    "global_maxpool",
    "dense",
    "relu",
    "softmax",
    "dropout",
    "gaussian_noise",
    "embedding_lookup",
    "LstmParams",
    "LstmState",
    "init_lstm_params",
    "lstm_step",
    "lstm_forward",
    "cross_entropy_loss",
    "one_hot",
    "Adagrad",
    "AdagradState",
    "adagrad_update",
    "finite_difference_check",
    "save_checkpoint",
    "load_checkpoint",
    "FORMAT_VERSION",
]
