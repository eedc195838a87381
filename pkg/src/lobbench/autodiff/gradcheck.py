from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor, no_grad

# denominators are floored here so entries with a true gradient of ~0 compare
# on absolute error instead of amplifying finite-difference round-off
DENOM_FLOOR = 1e-6


def grad_check(fn: Callable[..., Tensor], inputs: Sequence[Tensor], eps: float = 1e-5,
               max_entries: int | None = None, seed: int = 0) -> float:
    """Max relative error between reverse-mode and central-difference gradients.

    ``fn`` maps ``inputs`` to a scalar Tensor. Every input with
    ``requires_grad`` is checked entry by entry, or on ``max_entries``
    randomly chosen entries per input when that is set.
    """
    rng = np.random.default_rng(seed)
    for x in inputs:
        x.grad = None
    loss = fn(*inputs)
    loss.backward()
    worst = 0.0
    with no_grad():
        for x in inputs:
            if not x.requires_grad:
                continue
            analytic = x.grad if x.grad is not None else np.zeros_like(x.data)
            coords = list(np.ndindex(x.data.shape))
            if max_entries is not None and len(coords) > max_entries:
                pick = np.sort(rng.choice(len(coords), size=max_entries, replace=False))
                coords = [coords[i] for i in pick]
            numeric = np.zeros(x.data.shape)
            checked = np.zeros(x.data.shape, dtype=bool)
            for idx in coords:
                checked[idx] = True
                orig = x.data[idx]
                x.data[idx] = orig + eps
                up = float(fn(*inputs).data)
                x.data[idx] = orig - eps
                down = float(fn(*inputs).data)
                x.data[idx] = orig
                numeric[idx] = (up - down) / (2 * eps)
            numeric = numeric[checked]
            a = analytic[checked]
            denom = np.maximum(np.maximum(np.abs(a), np.abs(numeric)), DENOM_FLOOR)
            worst = max(worst, float(np.max(np.abs(a - numeric) / denom)))
    return worst
