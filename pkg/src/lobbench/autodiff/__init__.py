"""Small numpy reverse-mode autodiff engine with the layers the model zoo needs."""

from . import ops
from .checkpoint import load_checkpoint, save_checkpoint
from .functional import categorical_crossentropy, one_hot, softmax, tanh
from .gradcheck import grad_check
from .layers import (LSTM, Conv2D, Dense, Inception, Module, SelfAttention, conv2d_forward, dense_forward,
                     inception_block, lstm_forward, self_attention)
from .optim import Adam, AdamState, adam_step
from .tensor import NonFiniteError, Tensor, no_grad

__all__ = [
    "Adam", "AdamState", "Conv2D", "Dense", "Inception", "LSTM", "Module", "NonFiniteError", "SelfAttention",
    "Tensor", "adam_step", "categorical_crossentropy", "conv2d_forward", "dense_forward", "grad_check",
    "inception_block", "load_checkpoint", "lstm_forward", "no_grad", "one_hot", "ops", "save_checkpoint",
    "self_attention", "softmax", "tanh",
]
