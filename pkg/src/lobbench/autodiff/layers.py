"""Layer kernels and the parameter containers built on them.

Shapes are batch-first throughout: dense takes [B, n], recurrent layers take
[B, T, d], convolutions take [B, T, W, C].
"""

from __future__ import annotations

import math
from typing import Iterator

import numpy as np

from . import ops
from .tensor import Tensor, as_tensor

LEAKY_SLOPE = 0.01


# -- functional kernels ------------------------------------------------------

def dense_forward(x, W, b) -> Tensor:
    x, W = as_tensor(x), as_tensor(W)
    if x.shape[-1] != W.shape[0] or as_tensor(b).shape != (W.shape[1],):
        raise ValueError(f"dense shapes disagree: x {x.shape}, W {W.shape}, b {as_tensor(b).shape}")
    return ops.matmul(x, W) + b


def lstm_forward(seq, W, U, b) -> tuple[Tensor, tuple[Tensor, Tensor]]:
    """Run an LSTM over ``seq`` and return (hidden sequence, (h_T, c_T)).

    ``W`` is [d_in, 4h], ``U`` is [h, 4h], ``b`` is [4h]; gate blocks are
    ordered input, forget, candidate, output. Initial states are zero.
    A 2-D ``seq`` of shape [T, d_in] is treated as a batch of one.
    """
    seq = as_tensor(seq)
    squeeze = seq.ndim == 2
    if squeeze:
        seq = ops.reshape(seq, (1,) + seq.shape)
    B, T, d_in = seq.shape
    h_units = U.shape[0]
    if W.shape != (d_in, 4 * h_units) or U.shape != (h_units, 4 * h_units) or b.shape != (4 * h_units,):
        raise ValueError(f"lstm weight shapes {W.shape}, {U.shape}, {b.shape} do not fit input width {d_in}")
    if T < 1:
        raise ValueError("lstm needs at least one time step")

    xw = ops.matmul(seq, W) + b  # [B, T, 4h]
    h = Tensor(np.zeros((B, h_units), dtype=seq.dtype))
    c = Tensor(np.zeros((B, h_units), dtype=seq.dtype))
    hs = []
    for t in range(T):
        z = xw[:, t, :] if t == 0 else xw[:, t, :] + ops.matmul(h, U)
        i = ops.sigmoid(z[:, :h_units])
        f = ops.sigmoid(z[:, h_units:2 * h_units])
        g = ops.tanh(z[:, 2 * h_units:3 * h_units])
        o = ops.sigmoid(z[:, 3 * h_units:])
        c = i * g if t == 0 else f * c + i * g
        h = o * ops.tanh(c)
        hs.append(h)
    out = ops.stack(hs, axis=1)
    if squeeze:
        out, h, c = out[0], h[0], c[0]
    return out, (h, c)


def conv2d_forward(x, kernel, bias, stride=(1, 1), padding: str = "valid") -> Tensor:
    return ops.conv2d(x, kernel, bias, stride=stride, padding=padding)


def self_attention(h, Wq, Wk, Wv) -> tuple[Tensor, Tensor]:
    """Single-head scaled dot-product self-attention over the full context.

    Returns (context [B, T, d], attention weights [B, T, T]).
    """
    h = as_tensor(h)
    squeeze = h.ndim == 2
    if squeeze:
        h = ops.reshape(h, (1,) + h.shape)
    d = Wq.shape[1]
    if Wq.shape[0] != h.shape[-1] or Wk.shape != Wq.shape or Wv.shape[0] != h.shape[-1]:
        raise ValueError(f"attention projections {Wq.shape}/{Wk.shape}/{Wv.shape} do not fit input {h.shape}")
    q = ops.matmul(h, Wq)
    k = ops.matmul(h, Wk)
    v = ops.matmul(h, Wv)
    scores = ops.matmul(q, ops.transpose(k, (0, 2, 1))) * (1.0 / math.sqrt(d))
    attn = ops.softmax(scores, axis=-1)
    out = ops.matmul(attn, v)
    if squeeze:
        return out[0], attn[0]
    return out, attn


def inception_block(x, params: dict) -> Tensor:
    """Three parallel time-axis branches, channel-concatenated.

    ``params`` maps ``"a1", "a3", "b1", "b5", "c1"`` to (kernel, bias) pairs:
    1x1 -> 3x1, 1x1 -> 5x1, and 3x1 max-pool -> 1x1.
    """
    act = lambda t: ops.leaky_relu(t, LEAKY_SLOPE)  # noqa: E731
    conv = lambda t, key: ops.conv2d(t, *params[key], padding="same")  # noqa: E731
    a = act(conv(act(conv(x, "a1")), "a3"))
    b = act(conv(act(conv(x, "b1")), "b5"))
    c = act(conv(ops.maxpool2d(x, (3, 1), (1, 1), "same"), "c1"))
    return ops.concat([a, b, c], axis=-1)


# -- parameter containers ----------------------------------------------------

def _uniform(rng: np.random.Generator, limit: float, shape, dtype) -> Tensor:
    return Tensor(rng.uniform(-limit, limit, size=shape).astype(dtype), requires_grad=True)


class Module:
    """Ordered parameter tree; children and parameters are discovered by attribute order."""

    def parameters(self) -> Iterator[tuple[str, Tensor]]:
        for name, value in vars(self).items():
            if isinstance(value, Tensor) and value.requires_grad:
                yield name, value
            elif isinstance(value, Module):
                for sub, p in value.parameters():
                    yield f"{name}.{sub}", p
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        for sub, p in item.parameters():
                            yield f"{name}.{i}.{sub}", p

    def param_count(self) -> int:
        return int(np.sum([p.data.size for _, p in self.parameters()], dtype=np.int64))

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)


class Dense(Module):
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator, dtype=np.float64,
                 init: str = "lecun"):
        if init == "zeros":
            self.W = Tensor(np.zeros((n_in, n_out), dtype=dtype), requires_grad=True)
        else:
            gain = 6.0 if init == "he" else 3.0
            self.W = _uniform(rng, math.sqrt(gain / n_in), (n_in, n_out), dtype)
        self.b = Tensor(np.zeros(n_out, dtype=dtype), requires_grad=True)

    def forward(self, x):
        return dense_forward(x, self.W, self.b)


class LSTM(Module):
    def __init__(self, n_in: int, units: int, rng: np.random.Generator, dtype=np.float64):
        self.units = units
        self.W = _uniform(rng, math.sqrt(3.0 / n_in), (n_in, 4 * units), dtype)
        self.U = _uniform(rng, 1.0 / math.sqrt(units), (units, 4 * units), dtype)
        b = np.zeros(4 * units, dtype=dtype)
        b[units:2 * units] = 1.0
        self.b = Tensor(b, requires_grad=True)

    def forward(self, seq):
        return lstm_forward(seq, self.W, self.U, self.b)


class Conv2D(Module):
    def __init__(self, c_in: int, filters: int, kernel: tuple[int, int], rng: np.random.Generator,
                 stride=(1, 1), padding: str = "valid", dtype=np.float64):
        fan_in = kernel[0] * kernel[1] * c_in
        self.kernel = _uniform(rng, math.sqrt(6.0 / fan_in), kernel + (c_in, filters), dtype)
        self.bias = Tensor(np.zeros(filters, dtype=dtype), requires_grad=True)
        self.stride = tuple(stride)
        self.padding = padding

    def forward(self, x):
        return conv2d_forward(x, self.kernel, self.bias, self.stride, self.padding)


class Inception(Module):
    def __init__(self, c_in: int, width: int, rng: np.random.Generator, dtype=np.float64):
        self.a1 = Conv2D(c_in, width, (1, 1), rng, padding="same", dtype=dtype)
        self.a3 = Conv2D(width, width, (3, 1), rng, padding="same", dtype=dtype)
        self.b1 = Conv2D(c_in, width, (1, 1), rng, padding="same", dtype=dtype)
        self.b5 = Conv2D(width, width, (5, 1), rng, padding="same", dtype=dtype)
        self.c1 = Conv2D(c_in, width, (1, 1), rng, padding="same", dtype=dtype)

    def forward(self, x):
        params = {k: (getattr(self, k).kernel, getattr(self, k).bias) for k in ("a1", "a3", "b1", "b5", "c1")}
        return inception_block(x, params)


class SelfAttention(Module):
    def __init__(self, d: int, rng: np.random.Generator, dtype=np.float64):
        limit = math.sqrt(3.0 / d)
        self.Wq = _uniform(rng, limit, (d, d), dtype)
        self.Wk = _uniform(rng, limit, (d, d), dtype)
        self.Wv = _uniform(rng, limit, (d, d), dtype)

    def forward(self, h):
        return self_attention(h, self.Wq, self.Wk, self.Wv)
