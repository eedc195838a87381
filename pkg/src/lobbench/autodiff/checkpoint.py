"""Parameter checkpoints as ``.npz`` archives with an embedded JSON header.

The header lists (name, shape, dtype) in parameter order plus arbitrary
metadata; arrays are stored row-major under ``p0, p1, ...``. Adam moments, when
given, are stored under ``m0.../v0...``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .optim import AdamState


def save_checkpoint(path, named_params: list[tuple[str, np.ndarray]], meta: dict | None = None,
                    adam: AdamState | None = None) -> None:
    header = {
        "params": [{"name": n, "shape": list(a.shape), "dtype": str(a.dtype)} for n, a in named_params],
        "meta": meta or {},
    }
    arrays = {f"p{i}": np.ascontiguousarray(a) for i, (_, a) in enumerate(named_params)}
    if adam is not None:
        header["adam"] = {"lr": adam.lr, "beta1": adam.beta1, "beta2": adam.beta2, "eps": adam.eps, "t": adam.t}
        for i, (m, v) in enumerate(zip(adam.m, adam.v)):
            arrays[f"m{i}"] = m
            arrays[f"v{i}"] = v
    arrays["header"] = np.frombuffer(json.dumps(header, sort_keys=True).encode(), dtype=np.uint8)
    path = Path(path)
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path) -> tuple[list[tuple[str, np.ndarray]], dict, AdamState | None]:
    with np.load(path) as z:
        header = json.loads(bytes(z["header"]).decode())
        params = []
        for i, entry in enumerate(header["params"]):
            arr = z[f"p{i}"]
            if list(arr.shape) != entry["shape"]:
                raise ValueError(f"checkpoint entry {entry['name']} has shape {arr.shape}, header says {entry['shape']}")
            params.append((entry["name"], arr))
        adam = None
        if "adam" in header:
            a = header["adam"]
            adam = AdamState(lr=a["lr"], beta1=a["beta1"], beta2=a["beta2"], eps=a["eps"], t=a["t"])
            if a["t"] > 0:
                adam.m = [z[f"m{i}"] for i in range(len(params))]
                adam.v = [z[f"v{i}"] for i in range(len(params))]
    return params, header["meta"], adam
