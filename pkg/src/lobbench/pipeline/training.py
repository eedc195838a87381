from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from ..autodiff import Adam, NonFiniteError, ops
from ..autodiff.functional import one_hot
from .dataset import WindowSet

log = logging.getLogger(__name__)

LOGISTIC_MAX_EPOCHS = 20


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 1024
    batches_per_epoch: int = 16_000
    epochs: int = 30
    learning_rate: float = 0.001
    horizon: int = 10
    seed: int = 0
    dtype: str = "float32"

    def __post_init__(self):
        if min(self.batch_size, self.batches_per_epoch, self.epochs, self.horizon) < 1:
            raise ValueError("batch_size, batches_per_epoch, epochs and horizon must be positive")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainResult:
    epoch_losses: list[float] = field(default_factory=list)
    steps: int = 0


def sample_batch_indices(rng: np.random.Generator, n: int, batch_size: int) -> np.ndarray:
    """Uniform draw with replacement from range(n)."""
    return rng.integers(0, n, size=batch_size)


def train(model, data: WindowSet, config: TrainConfig, rng: np.random.Generator | None = None) -> TrainResult:
    """Fit ``model`` with Adam on randomly drawn batches; returns the mean loss per epoch.

    Baselines have nothing to fit and return an empty trace.
    """
    if len(data) == 0:
        raise ValueError("training set is empty")
    if not getattr(model, "trainable", False):
        return TrainResult()
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    params = [p for _, p in model.parameters()]
    opt = Adam(params, lr=config.learning_rate)
    epochs = config.epochs
    if model.spec.kind == "logistic":
        epochs = min(epochs, LOGISTIC_MAX_EPOCHS)
    dtype = model.spec.dtype
    result = TrainResult()
    for epoch in range(epochs):
        total = 0.0
        for b in range(config.batches_per_epoch):
            idx = sample_batch_indices(rng, len(data), config.batch_size)
            x = data.windows(idx).astype(dtype, copy=False)
            y = one_hot(data.labels[idx], dtype=dtype)
            opt.zero_grad()
            try:
                loss = ops.softmax_cross_entropy(model(x), y)
                penalty = model.penalty()
                if penalty is not None:
                    loss = loss + penalty
                loss.backward()
            except NonFiniteError as exc:
                raise NonFiniteError(f"{model.spec.kind}: epoch {epoch} batch {b}: {exc}") from exc
            value = float(loss.data)
            if not np.isfinite(value):
                raise NonFiniteError(f"{model.spec.kind}: non-finite loss at epoch {epoch} batch {b}")
            opt.step()
            total += value
            result.steps += 1
        result.epoch_losses.append(total / config.batches_per_epoch)
        log.info("%s h=%d epoch %d loss %.5f", model.spec.kind, config.horizon, epoch, result.epoch_losses[-1])
    return result
