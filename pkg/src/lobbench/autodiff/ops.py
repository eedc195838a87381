"""Differentiable primitives.

Each function takes Tensors (or array-likes, treated as constants) and returns
a Tensor whose backward closure produces one gradient per parent.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .tensor import Tensor, as_tensor, make

LOG_EPS = 1e-7


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data + b.data

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return make(out, (a, b), backward, "add")


def neg(a) -> Tensor:
    a = as_tensor(a)
    return make(-a.data, (a,), lambda g: (-g,), "neg")


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data * b.data

    def backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return make(out, (a, b), backward, "mul")


def matmul(a, b) -> Tensor:
    """``a @ b`` for 2-D operands, batched stacks, or a stack times a 2-D matrix."""
    a, b = as_tensor(a), as_tensor(b)
    out = a.data @ b.data

    def backward(g):
        ga = g @ np.swapaxes(b.data, -1, -2)
        if b.ndim == 2 and a.ndim > 2:
            a2 = a.data.reshape(-1, a.shape[-1])
            gb = a2.T @ g.reshape(-1, g.shape[-1])
        else:
            gb = np.swapaxes(a.data, -1, -2) @ g
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

    return make(out, (a, b), backward, "matmul")


def sum(a, axis=None, keepdims=False) -> Tensor:
    a = as_tensor(a)
    out = np.asarray(a.data.sum(axis=axis, keepdims=keepdims))

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy(),)

    return make(out, (a,), backward, "sum")


def mean(a, axis=None) -> Tensor:
    a = as_tensor(a)
    n = a.data.size if axis is None else a.shape[axis]
    return mul(sum(a, axis=axis), 1.0 / n)


def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    return make(a.data.reshape(shape), (a,), lambda g: (g.reshape(a.shape),), "reshape")


def transpose(a, axes) -> Tensor:
    a = as_tensor(a)
    inv = np.argsort(axes)
    return make(np.transpose(a.data, axes), (a,), lambda g: (np.transpose(g, inv),), "transpose")


def getitem(a, idx) -> Tensor:
    a = as_tensor(a)
    out = a.data[idx]

    basic = all(isinstance(i, (slice, int, type(Ellipsis))) or i is None
                for i in (idx if isinstance(idx, tuple) else (idx,)))

    def backward(g):
        full = np.zeros_like(a.data)
        if basic:
            full[idx] += g
        else:
            np.add.at(full, idx, g)
        return (full,)

    return make(np.array(out), (a,), backward, "getitem")


def concat(tensors, axis: int = -1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    out = np.concatenate([t.data for t in tensors], axis=axis)
    cuts = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, cuts, axis=axis))

    return make(out, tensors, backward, "concat")


def stack(tensors, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    out = np.stack([t.data for t in tensors], axis=axis)

    def backward(g):
        return tuple(np.moveaxis(g, axis, 0))

    return make(out, tensors, backward, "stack")


def tanh(a) -> Tensor:
    a = as_tensor(a)
    y = np.tanh(a.data)
    return make(y, (a,), lambda g: (g * (1.0 - y * y),), "tanh")


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    # split by sign so exp never overflows
    x = a.data
    y = np.empty_like(x)
    pos = x >= 0
    y[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    y[~pos] = ex / (1.0 + ex)
    return make(y, (a,), lambda g: (g * y * (1.0 - y),), "sigmoid")


def relu(a) -> Tensor:
    a = as_tensor(a)
    mask = a.data > 0
    return make(a.data * mask, (a,), lambda g: (g * mask,), "relu")


def leaky_relu(a, slope: float = 0.01) -> Tensor:
    a = as_tensor(a)
    mask = a.data > 0
    out = np.maximum(a.data, a.data * a.dtype.type(slope))

    def backward(g):
        return (np.where(mask, g, g * a.dtype.type(slope)),)

    return make(out, (a,), backward, "leaky_relu")


def softmax(a, axis: int = -1) -> Tensor:
    a = as_tensor(a)
    z = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        return (y * (g - (g * y).sum(axis=axis, keepdims=True)),)

    return make(y, (a,), backward, "softmax")


def softmax_cross_entropy(logits, onehot) -> Tensor:
    """Mean categorical cross-entropy of ``softmax(logits)`` against one-hot rows.

    The loss is ``-sum(t * log(p + LOG_EPS))`` averaged over the batch. The
    gradient is exact for that stabilized loss: with ``w = t * p / (p + eps)``
    it is ``(p * sum(w) - w) / batch``, which reduces to ``(p - t) / batch``
    as eps goes to 0.
    """
    logits = as_tensor(logits)
    t = np.asarray(onehot.data if isinstance(onehot, Tensor) else onehot, dtype=logits.dtype)
    if t.shape != logits.shape:
        raise ValueError(f"target shape {t.shape} does not match logits {logits.shape}")
    z = logits.data - logits.data.max(axis=-1, keepdims=True)
    e = np.exp(z)
    p = e / e.sum(axis=-1, keepdims=True)
    n = logits.shape[0]
    loss = np.asarray(-(t * np.log(p + LOG_EPS)).sum() / n, dtype=logits.dtype)

    def backward(g):
        w = t * p / (p + LOG_EPS)
        return (g * (p * w.sum(axis=-1, keepdims=True) - w) / n,)

    return make(loss, (logits,), backward, "softmax_xent")


def _same_pads(size: int, k: int, s: int) -> tuple[int, int]:
    out = -(-size // s)
    total = max((out - 1) * s + k - size, 0)
    return total // 2, total - total // 2


def _pads(x_shape, kernel, stride, padding):
    if padding == "valid":
        return (0, 0), (0, 0)
    if padding == "same":
        return _same_pads(x_shape[1], kernel[0], stride[0]), _same_pads(x_shape[2], kernel[1], stride[1])
    raise ValueError(f"unknown padding mode {padding!r}")


def conv2d(x, kernel, bias=None, stride=(1, 1), padding: str = "valid") -> Tensor:
    """Cross-correlation over ``x`` [B, H, W, C_in] with ``kernel`` [kh, kw, C_in, C_out]."""
    x, kernel = as_tensor(x), as_tensor(kernel)
    kh, kw, cin, cout = kernel.shape
    if x.ndim != 4 or x.shape[3] != cin:
        raise ValueError(f"conv2d input {x.shape} incompatible with kernel {kernel.shape}")
    sh, sw = stride
    (pt, pb), (pl, pr) = _pads(x.shape, (kh, kw), stride, padding)
    xp = np.pad(x.data, ((0, 0), (pt, pb), (pl, pr), (0, 0))) if pt + pb + pl + pr else x.data
    if xp.shape[1] < kh or xp.shape[2] < kw:
        raise ValueError(f"kernel {(kh, kw)} does not fit padded input {xp.shape[1:3]}")
    B = x.shape[0]
    ho = (xp.shape[1] - kh) // sh + 1
    wo = (xp.shape[2] - kw) // sw + 1
    offsets = [(i, j) for i in range(kh) for j in range(kw)]
    # im2col: columns ordered (kernel row, kernel col, channel) to match kernel.reshape
    if len(offsets) == 1 and sh == sw == 1:
        cols = xp.reshape(-1, cin)
    else:
        cols = np.concatenate([xp[:, i:i + sh * (ho - 1) + 1:sh, j:j + sw * (wo - 1) + 1:sw, :]
                               for i, j in offsets], axis=-1).reshape(-1, kh * kw * cin)
    wmat = kernel.data.reshape(kh * kw * cin, cout)
    out = (cols @ wmat).reshape(B, ho, wo, cout)
    parents = [x, kernel]
    if bias is not None:
        bias = as_tensor(bias)
        out = out + bias.data
        parents.append(bias)

    def backward(g):
        g2 = g.reshape(-1, cout)
        gk = (cols.T @ g2).reshape(kernel.shape)
        gcols = (g2 @ wmat.T).reshape(B, ho, wo, kh * kw, cin)
        gxp = np.zeros(xp.shape, dtype=xp.dtype)
        for n, (i, j) in enumerate(offsets):
            gxp[:, i:i + sh * (ho - 1) + 1:sh, j:j + sw * (wo - 1) + 1:sw, :] += gcols[:, :, :, n, :]
        gx = gxp[:, pt:pt + x.shape[1], pl:pl + x.shape[2], :]
        grads = [gx, gk]
        if bias is not None:
            grads.append(g2.sum(axis=0))
        return tuple(grads)

    return make(out, parents, backward, "conv2d")


def maxpool2d(x, pool=(3, 1), stride=(1, 1), padding: str = "same") -> Tensor:
    x = as_tensor(x)
    kh, kw = pool
    sh, sw = stride
    (pt, pb), (pl, pr) = _pads(x.shape, pool, stride, padding)
    xp = np.pad(x.data, ((0, 0), (pt, pb), (pl, pr), (0, 0)), constant_values=-np.inf)
    win = sliding_window_view(xp, (kh, kw), axis=(1, 2))[:, ::sh, ::sw]
    flat = win.reshape(win.shape[:4] + (kh * kw,))
    arg = flat.argmax(axis=-1)
    out = np.take_along_axis(flat, arg[..., None], axis=-1)[..., 0]
    ho, wo = out.shape[1], out.shape[2]

    def backward(g):
        gxp = np.zeros(xp.shape, dtype=x.dtype)
        for i in range(kh):
            for j in range(kw):
                gxp[:, i:i + sh * ho:sh, j:j + sw * wo:sw, :] += g * (arg == i * kw + j)
        return (gxp[:, pt:pt + x.shape[1], pl:pl + x.shape[2], :],)

    return make(np.ascontiguousarray(out), (x,), backward, "maxpool2d")
