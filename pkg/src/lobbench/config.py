"""Experiment configuration (a JSON document) and per-job seed derivation."""

from __future__ import annotations

import hashlib
import json
import zlib
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .bayes import ROPE, THRESHOLD
from .data.synthetic import SyntheticConfig
from .models import KINDS
from .pipeline.evaluation import FOLD_SIZE
from .pipeline.training import TrainConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DataConfig:
    source: str = "synthetic"  # "synthetic" or "files"
    synthetic: SyntheticConfig = field(default_factory=SyntheticConfig)
    train_fraction: float = 0.6
    train_files: tuple[str, ...] = ()
    test_files: tuple[str, ...] = ()
    price_scale: int = 10_000
    on_invalid: str = "reject"


@dataclass(frozen=True)
class ExperimentConfig:
    data: DataConfig = field(default_factory=DataConfig)
    horizons: tuple[int, ...] = (10, 50, 100)
    models: tuple[str, ...] = KINDS
    train: TrainConfig = field(default_factory=TrainConfig)
    fold_size: int = FOLD_SIZE
    rope: float = ROPE
    rho: float | None = None
    threshold: float = THRESHOLD
    out_dir: str = "runs/default"
    seed: int = 0
    workers: int = 1

    def validate(self, check_paths: bool = True) -> "ExperimentConfig":
        if not self.models or not self.horizons:
            raise ConfigError("need at least one model and one horizon")
        bad = [m for m in self.models if m not in KINDS]
        if bad:
            raise ConfigError(f"unknown model kinds {bad}; expected some of {list(KINDS)}")
        if any(int(h) < 1 for h in self.horizons):
            raise ConfigError("horizons must be positive integers")
        if self.fold_size < 1 or self.workers < 1:
            raise ConfigError("fold_size and workers must be positive")
        if self.rope < 0 or not 0 < self.threshold < 1:
            raise ConfigError("rope must be >= 0 and threshold in (0, 1)")
        if self.rho is not None and not 0 <= self.rho < 1:
            raise ConfigError("rho must lie in [0, 1)")
        d = self.data
        if d.source not in ("synthetic", "files"):
            raise ConfigError(f"data.source must be 'synthetic' or 'files', got {d.source!r}")
        if d.on_invalid not in ("reject", "skip"):
            raise ConfigError("data.on_invalid must be 'reject' or 'skip'")
        if d.source == "synthetic" and not 0 < d.train_fraction < 1:
            raise ConfigError("data.train_fraction must lie in (0, 1)")
        if d.source == "files":
            if not d.train_files or not d.test_files:
                raise ConfigError("file source needs train_files and test_files")
            if check_paths:
                missing = [p for p in d.train_files + d.test_files if not Path(p).is_file()]
                if missing:
                    raise ConfigError(f"missing data files: {missing}")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["horizons"] = list(self.horizons)
        d["models"] = list(self.models)
        d["data"]["train_files"] = list(self.data.train_files)
        d["data"]["test_files"] = list(self.data.test_files)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def config_hash(self) -> str:
        """Hash of everything that affects results (output dir and worker count excluded)."""
        d = self.to_dict()
        d.pop("out_dir")
        d.pop("workers")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        try:
            d = dict(d)
            data = dict(d.pop("data", {}))
            synth = SyntheticConfig(**data.pop("synthetic", {}))
            for key in ("train_files", "test_files"):
                if key in data:
                    data[key] = tuple(data[key])
            data_cfg = DataConfig(synthetic=synth, **data)
            train = TrainConfig(**d.pop("train", {}))
            for key in ("horizons", "models"):
                if key in d:
                    d[key] = tuple(d[key])
            known = {f.name for f in fields(cls)}
            unknown = set(d) - known
            if unknown:
                raise ConfigError(f"unknown config keys {sorted(unknown)}")
            return cls(data=data_cfg, train=train, **d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


def derive_seed(global_seed: int, *keys) -> int:
    """Seed for one job, from the global seed and a name path like ("train", "mlp", 10).

    The name is CRC32-hashed and mixed with the global seed through
    ``numpy.random.SeedSequence``, so a job's seed depends only on its own
    name and adding or removing other jobs leaves it unchanged.
    """
    tag = zlib.crc32("/".join(str(k) for k in keys).encode())
    return int(np.random.SeedSequence([int(global_seed), tag]).generate_state(1)[0])
