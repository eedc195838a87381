"""The seven benchmark models behind one predict/forward interface.

Learning models map a batch of [10, 40] windows to class logits; their
probabilities come from a softmax head. The random and naive baselines emit
one-hot predictions and have no parameters.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .autodiff import LSTM, Conv2D, Dense, Inception, Module, SelfAttention, Tensor, no_grad, ops
from .autodiff.functional import softmax
from .autodiff.layers import LEAKY_SLOPE
from .labeling import FLAT

KINDS = ("random", "naive", "logistic", "mlp", "lstm", "attention_lstm", "cnn_lstm")
BASELINES = ("random", "naive")
DISPLAY_NAMES = {
    "random": "Random Model",
    "naive": "Naive Model",
    "logistic": "Logistic Regression",
    "mlp": "Multilayer Perceptron",
    "lstm": "Shallow LSTM",
    "attention_lstm": "Self-Attention LSTM",
    "cnn_lstm": "CNN-LSTM",
}
N_CLASSES = 3
WINDOW_SHAPE = (10, 40)


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    input_shape: tuple[int, int] = WINDOW_SHAPE
    seed: int = 0
    l2: float = 1e-4
    dtype: str = "float64"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {KINDS}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["input_shape"] = list(self.input_shape)
        return d


def argmax_lowest(probs: np.ndarray) -> np.ndarray:
    """Row-wise argmax; ties resolve to the lowest class index."""
    return np.argmax(probs, axis=-1)


class Network(Module):
    """Base for learning models: subclasses implement ``logits`` on a Tensor batch."""

    trainable = True

    def __init__(self, spec: ModelSpec):
        self.spec = spec
        self._trace: list[tuple[str, tuple[int, ...]]] | None = None

    def _note(self, name: str, t: Tensor) -> Tensor:
        if self._trace is not None:
            self._trace.append((name, t.shape[1:]))
        return t

    def _check(self, x: Tensor) -> None:
        if tuple(x.shape[1:]) != tuple(self.spec.input_shape):
            raise ValueError(f"{self.spec.kind} expects input [batch, {self.spec.input_shape}], got {x.shape}")

    def forward(self, x) -> Tensor:
        x = x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=self.spec.dtype))
        self._check(x)
        return self.logits(x)

    def predict_proba(self, x: np.ndarray, batch_size: int = 4096) -> np.ndarray:
        x = np.asarray(x, dtype=self.spec.dtype)
        out = []
        with no_grad():
            for i in range(0, len(x), batch_size):
                out.append(softmax(self.forward(x[i:i + batch_size]).data.astype(np.float64)))
        if not out:
            return np.empty((0, N_CLASSES))
        return np.concatenate(out)

    def predict(self, x: np.ndarray) -> np.ndarray:
        return argmax_lowest(self.predict_proba(x))

    def shape_trace(self) -> list[tuple[str, tuple[int, ...]]]:
        """Layer-by-layer output shapes (batch axis dropped) for one dummy sample."""
        self._trace = [("input", tuple(self.spec.input_shape))]
        try:
            with no_grad():
                self.forward(np.zeros((1,) + tuple(self.spec.input_shape), dtype=self.spec.dtype))
            return self._trace
        finally:
            self._trace = None

    def penalty(self) -> Tensor | None:
        return None


class LogisticRegression(Network):
    def __init__(self, spec: ModelSpec, rng: np.random.Generator):
        super().__init__(spec)
        n_in = int(np.prod(spec.input_shape))
        self.out = Dense(n_in, N_CLASSES, rng, spec.dtype, init="zeros")

    def logits(self, x):
        x = self._note("flatten", ops.reshape(x, (x.shape[0], -1)))
        return self._note("dense_3", self.out(x))

    def penalty(self):
        return ops.sum(self.out.W * self.out.W) * (0.5 * self.spec.l2)


class MLP(Network):
    HIDDEN = (512, 1024, 1024, 64)

    def __init__(self, spec: ModelSpec, rng: np.random.Generator):
        super().__init__(spec)
        n = int(np.prod(spec.input_shape))
        self.hidden = []
        for width in self.HIDDEN:
            self.hidden.append(Dense(n, width, rng, spec.dtype, init="he"))
            n = width
        self.out = Dense(n, N_CLASSES, rng, spec.dtype)

    def logits(self, x):
        x = self._note("flatten", ops.reshape(x, (x.shape[0], -1)))
        for layer in self.hidden:
            x = self._note(f"dense_{layer.W.shape[1]}", ops.relu(layer(x)))
        return self._note("dense_3", self.out(x))


class ShallowLSTM(Network):
    UNITS = 20

    def __init__(self, spec: ModelSpec, rng: np.random.Generator):
        super().__init__(spec)
        self.lstm = LSTM(spec.input_shape[1], self.UNITS, rng, spec.dtype)
        self.out = Dense(self.UNITS, N_CLASSES, rng, spec.dtype)

    def logits(self, x):
        _, (h, _) = self.lstm(x)
        self._note(f"lstm_{self.UNITS}", h)
        return self._note("dense_3", self.out(h))


class AttentionLSTM(Network):
    UNITS = 40

    def __init__(self, spec: ModelSpec, rng: np.random.Generator):
        super().__init__(spec)
        T = spec.input_shape[0]
        self.lstm = LSTM(spec.input_shape[1], self.UNITS, rng, spec.dtype)
        self.attention = SelfAttention(self.UNITS, rng, spec.dtype)
        self.out = Dense(T * self.UNITS, N_CLASSES, rng, spec.dtype)

    def logits(self, x):
        seq, _ = self.lstm(x)
        self._note(f"lstm_{self.UNITS}", seq)
        ctx, _ = self.attention(seq)
        self._note("self_attention", ctx)
        flat = self._note("flatten", ops.reshape(ctx, (ctx.shape[0], -1)))
        return self._note("dense_3", self.out(flat))


class CNNLSTM(Network):
    FILTERS = 16
    INCEPTION = 32
    UNITS = 64
    # (kernel, stride, padding) per conv, three blocks of three
    CONVS = (
        ((1, 2), (1, 2), "valid"), ((4, 1), (1, 1), "same"), ((4, 1), (1, 1), "same"),
        ((1, 2), (1, 2), "valid"), ((4, 1), (1, 1), "same"), ((4, 1), (1, 1), "same"),
        ((1, 10), (1, 1), "valid"), ((4, 1), (1, 1), "same"), ((4, 1), (1, 1), "same"),
    )

    def __init__(self, spec: ModelSpec, rng: np.random.Generator):
        super().__init__(spec)
        c = 1
        self.convs = []
        for kernel, stride, padding in self.CONVS:
            self.convs.append(Conv2D(c, self.FILTERS, kernel, rng, stride, padding, spec.dtype))
            c = self.FILTERS
        self.inception = Inception(c, self.INCEPTION, rng, spec.dtype)
        self.lstm = LSTM(3 * self.INCEPTION, self.UNITS, rng, spec.dtype)
        self.out = Dense(self.UNITS, N_CLASSES, rng, spec.dtype)

    def logits(self, x):
        B, T, W = x.shape
        h = ops.reshape(x, (B, T, W, 1))
        for conv in self.convs:
            kh, kw = conv.kernel.shape[:2]
            h = self._note(f"conv_{kh}x{kw}@{self.FILTERS}", ops.leaky_relu(conv(h), LEAKY_SLOPE))
        h = self._note(f"inception@{self.INCEPTION}", self.inception(h))
        seq = ops.reshape(h, (B, T, h.shape[2] * h.shape[3]))
        _, (last, _) = self.lstm(seq)
        self._note(f"lstm_{self.UNITS}", last)
        return self._note("dense_3", self.out(last))


class Baseline:
    trainable = False

    def __init__(self, spec: ModelSpec):
        self.spec = spec

    def param_count(self) -> int:
        return 0

    def parameters(self):
        return iter(())

    def predict_proba(self, x) -> np.ndarray:
        labels = self.predict(x)
        out = np.zeros((len(labels), N_CLASSES))
        out[np.arange(len(labels)), labels] = 1.0
        return out


class RandomModel(Baseline):
    def __init__(self, spec: ModelSpec):
        super().__init__(spec)
        self._rng = np.random.default_rng(spec.seed)

    def predict(self, x) -> np.ndarray:
        return self._rng.integers(0, N_CLASSES, size=len(x))


class NaiveModel(Baseline):
    def predict(self, x) -> np.ndarray:
        return predict_naive(len(x))


def predict_random(n: int, seed: int) -> np.ndarray:
    """i.i.d. uniform class indices in {0, 1, 2}."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return np.random.default_rng(seed).integers(0, N_CLASSES, size=n)


def predict_naive(n: int) -> np.ndarray:
    """Always the middle class."""
    return np.full(n, FLAT, dtype=np.int64)


_BUILDERS = {
    "logistic": LogisticRegression,
    "mlp": MLP,
    "lstm": ShallowLSTM,
    "attention_lstm": AttentionLSTM,
    "cnn_lstm": CNNLSTM,
}


def build(spec: ModelSpec):
    if spec.kind == "random":
        return RandomModel(spec)
    if spec.kind == "naive":
        return NaiveModel(spec)
    if spec.kind not in _BUILDERS:
        raise ValueError(f"unknown model kind {spec.kind!r}")
    rng = np.random.default_rng(spec.seed)
    return _BUILDERS[spec.kind](spec, rng)


def expected_param_count(kind: str, input_shape=WINDOW_SHAPE) -> int:
    """Closed-form parameter count per architecture."""
    T, F = input_shape
    dense = lambda i, o: i * o + o  # noqa: E731
    lstm = lambda i, h: 4 * ((i + h) * h + h)  # noqa: E731
    if kind in BASELINES:
        return 0
    if kind == "logistic":
        return dense(T * F, 3)
    if kind == "mlp":
        dims = (T * F,) + MLP.HIDDEN + (3,)
        return sum(dense(a, b) for a, b in zip(dims, dims[1:]))
    if kind == "lstm":
        return lstm(F, 20) + dense(20, 3)
    if kind == "attention_lstm":
        return lstm(F, 40) + 3 * 40 * 40 + dense(T * 40, 3)
    if kind == "cnn_lstm":
        conv = lambda kh, kw, ci, co: kh * kw * ci * co + co  # noqa: E731
        total, c = 0, 1
        for (kh, kw), _, _ in CNNLSTM.CONVS:
            total += conv(kh, kw, c, 16)
            c = 16
        w = 32
        total += conv(1, 1, c, w) + conv(3, 1, w, w) + conv(1, 1, c, w) + conv(5, 1, w, w) + conv(1, 1, c, w)
        return total + lstm(3 * w, 64) + dense(64, 3)
    raise ValueError(f"unknown model kind {kind!r}")
