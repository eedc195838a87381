"""Seeded finite-difference cases, one builder per layer kernel.

Each builder returns (fn, inputs, max_entries). ``fn`` reduces the layer
output to a scalar by contracting with a fixed random tensor, so every output
entry carries a distinct weight.
"""

import numpy as np

from lobbench.autodiff import Tensor, conv2d_forward, dense_forward, inception_block, lstm_forward, ops, \
    self_attention


def _p(rng, *shape, scale=0.5):
    return Tensor(rng.normal(scale=scale, size=shape), requires_grad=True)


def _contract(out, rng):
    r = Tensor(rng.normal(size=out.shape))
    return ops.sum(out * r)


def dense_case(seed):
    rng = np.random.default_rng(seed)
    x, W, b = _p(rng, 3, 5), _p(rng, 5, 4), _p(rng, 4)
    r = Tensor(rng.normal(size=(3, 4)))
    return (lambda x, W, b: ops.sum(dense_forward(x, W, b) * r)), [x, W, b], None


def lstm_case(seed):
    rng = np.random.default_rng(seed)
    seq, W, U, b = _p(rng, 2, 3, 4), _p(rng, 4, 20), _p(rng, 5, 20), _p(rng, 20)
    r = Tensor(rng.normal(size=(2, 3, 5)))
    r2 = Tensor(rng.normal(size=(2, 5)))

    def fn(seq, W, U, b):
        hs, (_, c) = lstm_forward(seq, W, U, b)
        return ops.sum(hs * r) + ops.sum(c * r2)
    return fn, [seq, W, U, b], None


def conv2d_case(seed):
    rng = np.random.default_rng(seed)
    x, k, b = _p(rng, 1, 5, 6, 2), _p(rng, 3, 2, 2, 4), _p(rng, 4)
    stride, padding = [((1, 1), "valid"), ((1, 2), "valid"), ((1, 1), "same"), ((2, 1), "same")][seed % 4]
    shape = conv2d_forward(x, k, b, stride, padding).shape
    r = Tensor(rng.normal(size=shape))
    return (lambda x, k, b: ops.sum(conv2d_forward(x, k, b, stride, padding) * r)), [x, k, b], None


INCEPTION_KEYS = {"a1": (1, 16), "a3": (3, None), "b1": (1, 16), "b5": (5, None), "c1": (1, 16)}


def inception_params(rng, c_in=16, width=32):
    out = {}
    for key, (kh, cin) in INCEPTION_KEYS.items():
        ci = c_in if cin else width
        out[key] = (_p(rng, kh, 1, ci, width, scale=0.3), _p(rng, width, scale=0.3))
    return out


def inception_case(seed, width=4, max_entries=24):
    """T=10, C=16 input; the branch width is reduced so twenty seeds stay fast."""
    rng = np.random.default_rng(seed)
    x = _p(rng, 1, 10, 1, 16)
    params = inception_params(rng, 16, width)
    keys = sorted(params)
    flat = [x] + [t for k in keys for t in params[k]]
    r = Tensor(rng.normal(size=(1, 10, 1, 3 * width)))

    def fn(x, *tensors):
        ps = {k: (tensors[2 * i], tensors[2 * i + 1]) for i, k in enumerate(keys)}
        return ops.sum(inception_block(x, ps) * r)
    return fn, flat, max_entries


def attention_case(seed):
    rng = np.random.default_rng(seed)
    h, Wq, Wk, Wv = _p(rng, 2, 4, 6), _p(rng, 6, 6), _p(rng, 6, 6), _p(rng, 6, 6)
    r = Tensor(rng.normal(size=(2, 4, 6)))
    return (lambda h, Wq, Wk, Wv: ops.sum(self_attention(h, Wq, Wk, Wv)[0] * r)), [h, Wq, Wk, Wv], None


def softmax_ce_case(seed):
    rng = np.random.default_rng(seed)
    logits = _p(rng, 6, 3, scale=2.0)
    onehot = Tensor(np.eye(3)[rng.integers(0, 3, 6)])
    return (lambda z: ops.softmax_cross_entropy(z, onehot)), [logits], None


CASES = {
    "dense": dense_case,
    "lstm": lstm_case,
    "conv2d": conv2d_case,
    "inception": inception_case,
    "self_attention": attention_case,
    "softmax_ce": softmax_ce_case,
}
