"""Stage-by-stage experiment runner with a resumable run directory.

Layout of a run directory::

    manifest.json       config, config hash, seeds, dataset hashes, losses, finished stages
    data/segments.npz   raw books per segment (train_000, ..., test_000, ...)
    scaler.json         min-max parameters fitted on the training segments
    labels.csv          one row per labelled window end and horizon
    thresholds.json     training quantile thresholds per horizon
    checkpoints/        one .npz per trained (model, horizon)
    metrics.csv         one row per (model, horizon, fold)
    decisions.csv       pairwise posterior decisions
    ranking.json        tiers per horizon and metric
    tables.txt, tables.csv, rankings.txt, radar.svg

A stage listed as finished in the manifest, whose outputs are all present, is
skipped on the next invocation. Training is resumable per (model, horizon).
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import replace
from itertools import combinations
from pathlib import Path

import numpy as np

from . import bayes, report
from .autodiff import NonFiniteError, load_checkpoint, save_checkpoint
from .config import ConfigError, ExperimentConfig, derive_seed
from .data import fit_minmax_chunked, generate_synthetic_lob, load_orderbook_file, write_orderbook_file
from .data.scaling import ScalerParams
from .labeling import QuantileThresholds, classify, fit_quantile_thresholds
from .models import BASELINES, ModelSpec, build
from .pipeline import (METRIC_COLUMNS, HorizonLabels, Segment, WindowSet, build_window_set, evaluate_fold,
                       label_segment, make_test_folds, train)

log = logging.getLogger(__name__)

STAGES = ("ingest", "label", "train", "evaluate", "compare", "report")
LABEL_COLUMNS = ("config_hash", "segment_id", "split", "horizon", "t", "t_end", "target", "class")
DECISION_COLUMNS = ("config_hash", "horizon", "metric", "model_a", "model_b", "mean", "scale", "dof", "rho",
                    "rope", "p_left", "p_rope", "p_right", "verdict", "lean")


class DataError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


def _write_json(path: Path, obj) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    os.replace(tmp, path)


def _write_csv(path: Path, header, rows) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    os.replace(tmp, path)


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def job_key(kind: str, horizon: int) -> str:
    return f"{kind}@{horizon}"


class Run:
    def __init__(self, config: ExperimentConfig):
        self.config = config.validate()
        self.dir = Path(config.out_dir)
        self.hash = config.config_hash()
        self._segments: dict[str, np.ndarray] | None = None
        self._windows: dict[int, tuple[WindowSet, WindowSet]] = {}

    # -- manifest ------------------------------------------------------------
    @property
    def manifest_path(self) -> Path:
        return self.dir / "manifest.json"

    def seeds(self) -> dict:
        s, c = self.config.seed, self.config
        out = {"global": s, "data": derive_seed(s, "data", c.data.synthetic.seed)}
        for h in c.horizons:
            for kind in c.models:
                out[job_key(kind, h)] = {"init": derive_seed(s, "init", kind, h),
                                         "batches": derive_seed(s, "batches", kind, h)}
        return out

    def manifest(self) -> dict:
        if self.manifest_path.is_file():
            m = json.loads(self.manifest_path.read_text())
            if m.get("config_hash") != self.hash:
                raise ConfigError(f"{self.dir} holds a run with config hash {m.get('config_hash')}, "
                                  f"this config hashes to {self.hash}; use another --out")
            return m
        return {"config_hash": self.hash, "config": self.config.to_dict(), "seeds": self.seeds(),
                "dataset_hashes": {}, "stages": {}, "training": {}}

    def _save_manifest(self, m: dict) -> None:
        self.dir.mkdir(parents=True, exist_ok=True)
        _write_json(self.manifest_path, m)

    def is_done(self, stage: str, m: dict | None = None) -> bool:
        m = m if m is not None else self.manifest()
        outputs = m["stages"].get(stage)
        return outputs is not None and all((self.dir / p).exists() for p in outputs)

    # -- driving -------------------------------------------------------------
    def run_through(self, last: str = "report") -> list[str]:
        """Run every stage up to ``last``; returns the stages actually executed."""
        if last not in STAGES:
            raise ConfigError(f"unknown stage {last!r}")
        executed = []
        for stage in STAGES[:STAGES.index(last) + 1]:
            if self.is_done(stage):
                log.info("stage %s already complete, skipping", stage)
                continue
            try:
                outputs = getattr(self, f"stage_{stage}")()
            except (ConfigError, StageError):
                raise
            except Exception as exc:  # noqa: BLE001 - rewrapped with the stage name
                raise StageError(stage, exc) from exc
            m = self.manifest()
            m["stages"][stage] = sorted(outputs)
            self._save_manifest(m)
            executed.append(stage)
        return executed

    # -- data access ---------------------------------------------------------
    def segments(self) -> dict[str, np.ndarray]:
        if self._segments is None:
            with np.load(self.dir / "data" / "segments.npz") as z:
                self._segments = {k: z[k] for k in sorted(z.files)}
        return self._segments

    def scaler(self) -> ScalerParams:
        d = json.loads((self.dir / "scaler.json").read_text())
        d.pop("config_hash", None)
        return ScalerParams.from_json(json.dumps(d))

    def thresholds(self) -> dict[int, QuantileThresholds]:
        d = json.loads((self.dir / "thresholds.json").read_text())["horizons"]
        return {int(h): QuantileThresholds(v["q25"], v["q75"], v["source"]) for h, v in d.items()}

    def labels(self) -> dict[int, dict[str, HorizonLabels]]:
        cols: dict[tuple[int, str], tuple[list, list, list]] = {}
        with open(self.dir / "labels.csv", newline="") as fh:
            reader = csv.reader(fh)
            idx = {c: i for i, c in enumerate(next(reader))}
            ih, iseg, it, ie, ir = (idx[c] for c in ("horizon", "segment_id", "t", "t_end", "target"))
            for r in reader:
                t, e, tg = cols.setdefault((int(r[ih]), r[iseg]), ([], [], []))
                t.append(int(r[it]))
                e.append(int(r[ie]))
                tg.append(float(r[ir]))
        out: dict[int, dict[str, HorizonLabels]] = {}
        for (h, sid), (t, e, tg) in cols.items():
            out.setdefault(h, {})[sid] = HorizonLabels(sid, h, np.array(t, dtype=np.int64),
                                                       np.array(e, dtype=np.int64), np.array(tg))
        return out

    def window_sets(self, horizon: int) -> tuple[WindowSet, WindowSet]:
        if horizon not in self._windows:
            segs = self.segments()
            labels = self.labels()[horizon]
            scaler, thr = self.scaler(), self.thresholds()[horizon]
            out = []
            for split in ("train", "test"):
                ids = [s for s in segs if s.startswith(split + "_")]
                empty = HorizonLabels
                lab = [labels.get(s) or empty(s, horizon, np.empty(0, np.int64), np.empty(0, np.int64),
                                              np.empty(0)) for s in ids]
                out.append(build_window_set([Segment(s, segs[s]) for s in ids], lab, scaler, thr,
                                            dtype=self.config.train.dtype))
            self._windows[horizon] = (out[0], out[1])
        return self._windows[horizon]

    # -- stages --------------------------------------------------------------
    def stage_ingest(self) -> list[str]:
        d = self.config.data
        try:
            if d.source == "synthetic":
                synth = replace(d.synthetic, seed=self.seeds()["data"], price_scale=d.price_scale)
                flat = generate_synthetic_lob(synth)
                n_train = int(round(len(flat) * d.train_fraction))
                segs = {"train_000": flat[:n_train], "test_000": flat[n_train:]}
            else:
                segs = {}
                for split, files in (("train", d.train_files), ("test", d.test_files)):
                    for i, path in enumerate(files):
                        arr, stats = load_orderbook_file(path, d.price_scale, on_invalid=d.on_invalid)
                        if stats.skipped:
                            log.warning("%s: skipped %d invalid rows", path, stats.skipped)
                        segs[f"{split}_{i:03d}"] = arr
        except (ValueError, OSError) as exc:
            raise DataError(str(exc)) from exc
        for k, v in segs.items():
            if len(v) < 2:
                raise DataError(f"segment {k} has fewer than two books")
        (self.dir / "data").mkdir(parents=True, exist_ok=True)
        np.savez(self.dir / "data" / "segments.npz", **segs)
        self._segments = None
        scaler = fit_minmax_chunked([v for k, v in sorted(segs.items()) if k.startswith("train_")],
                                    d.price_scale)
        doc = json.loads(scaler.to_json())
        doc["config_hash"] = self.hash
        _write_json(self.dir / "scaler.json", doc)
        m = self.manifest()
        m["dataset_hashes"] = {k: hashlib.sha256(np.ascontiguousarray(v).tobytes()).hexdigest()
                               for k, v in sorted(segs.items())}
        self._save_manifest(m)
        return ["data/segments.npz", "scaler.json"]

    def export_books(self, directory=None) -> list[Path]:
        """Write every segment as a 40-column snapshot file."""
        directory = Path(directory) if directory else self.dir / "data"
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        for sid, flat in self.segments().items():
            p = directory / f"{sid}_orderbook_10.csv"
            write_orderbook_file(p, flat, self.config.data.price_scale)
            paths.append(p)
        return paths

    def stage_label(self) -> list[str]:
        segs = self.segments()
        rows, thresholds = [], {}
        for h in sorted(self.config.horizons):
            labs = {sid: label_segment(Segment(sid, flat), h) for sid, flat in segs.items()}
            train_targets = [labs[s].targets for s in labs if s.startswith("train_")]
            pooled = np.concatenate(train_targets) if train_targets else np.empty(0)
            if pooled.size == 0:
                raise DataError(f"no labelled training windows at horizon {h}")
            thr = fit_quantile_thresholds(pooled, source="train")
            thresholds[str(h)] = thr.to_dict()
            for sid, lab in labs.items():
                classes = classify(lab.targets, thr)
                split = sid.split("_")[0]
                for t, e, r, c in zip(lab.ticks.tolist(), lab.ends.tolist(), lab.targets.tolist(),
                                      np.atleast_1d(classes).tolist()):
                    rows.append((self.hash, sid, split, h, t, e, repr(r), c))
        _write_csv(self.dir / "labels.csv", LABEL_COLUMNS, rows)
        _write_json(self.dir / "thresholds.json", {"config_hash": self.hash, "horizons": thresholds})
        return ["labels.csv", "thresholds.json"]

    def checkpoint_path(self, kind: str, horizon: int) -> Path:
        return self.dir / "checkpoints" / f"{kind}_h{horizon}.npz"

    def model_spec(self, kind: str, horizon: int) -> ModelSpec:
        seeds = self.seeds()[job_key(kind, horizon)]
        return ModelSpec(kind, seed=seeds["init"], dtype=self.config.train.dtype)

    def stage_train(self) -> list[str]:
        (self.dir / "checkpoints").mkdir(parents=True, exist_ok=True)
        m = self.manifest()
        todo = []
        for h in sorted(self.config.horizons):
            for kind in self.config.models:
                if kind in BASELINES:
                    continue
                key = job_key(kind, h)
                if key in m["training"] and self.checkpoint_path(kind, h).is_file():
                    continue
                todo.append((kind, h))
        workers = min(self.config.workers, len(todo)) if todo else 1
        cfg_json = self.config.to_json()
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_train_job, cfg_json, kind, h) for kind, h in todo]
                for fut in as_completed(futures):
                    self._record_training(*fut.result())
        else:
            for kind, h in todo:
                self._record_training(*self.train_one(kind, h))
        return [str(self.checkpoint_path(k, h).relative_to(self.dir))
                for h in self.config.horizons for k in self.config.models if k not in BASELINES]

    def _record_training(self, key: str, info: dict) -> None:
        m = self.manifest()
        m["training"][key] = info
        self._save_manifest(m)

    def train_one(self, kind: str, horizon: int) -> tuple[str, dict]:
        train_set, _ = self.window_sets(horizon)
        spec = self.model_spec(kind, horizon)
        model = build(spec)
        seeds = self.seeds()[job_key(kind, horizon)]
        tcfg = replace(self.config.train, horizon=horizon, seed=seeds["batches"])
        result = train(model, train_set, tcfg, np.random.default_rng(seeds["batches"]))
        meta = {"spec": spec.to_dict(), "config_hash": self.hash, "horizon": horizon,
                "epoch_losses": result.epoch_losses, "steps": result.steps}
        save_checkpoint(self.checkpoint_path(kind, horizon),
                        [(n, p.data) for n, p in model.parameters()], meta)
        return job_key(kind, horizon), {"epoch_losses": result.epoch_losses, "steps": result.steps,
                                        "checkpoint": str(self.checkpoint_path(kind, horizon).relative_to(self.dir))}

    def load_model(self, kind: str, horizon: int):
        spec = self.model_spec(kind, horizon)
        model = build(spec)
        if kind in BASELINES:
            return model
        params, meta, _ = load_checkpoint(self.checkpoint_path(kind, horizon))
        live = list(model.parameters())
        if [n for n, _ in live] != [n for n, _ in params]:
            raise DataError(f"checkpoint for {job_key(kind, horizon)} does not match the architecture")
        for (_, p), (_, arr) in zip(live, params):
            p.data[...] = arr
        return model

    def stage_evaluate(self) -> list[str]:
        rows = []
        for h in sorted(self.config.horizons):
            _, test_set = self.window_sets(h)
            folds = make_test_folds(len(test_set), self.config.fold_size)
            for kind in self.config.models:
                model = self.load_model(kind, h)
                for k, fold in enumerate(folds):
                    fm = evaluate_fold(model, test_set, fold, k)
                    flat = fm.flat()
                    rows.append([self.hash, kind, h, k] + [_fmt(flat[c]) for c in METRIC_COLUMNS])
        _write_csv(self.dir / "metrics.csv", ("config_hash", "model", "horizon", "fold") + METRIC_COLUMNS, rows)
        return ["metrics.csv"]

    def stage_compare(self) -> list[str]:
        metrics = read_csv(self.dir / "metrics.csv")
        rows, rankings = [], {}
        models = list(self.config.models)
        for h in sorted(self.config.horizons):
            per = {m: sorted((r for r in metrics if r["model"] == m and int(r["horizon"]) == h),
                             key=lambda r: int(r["fold"])) for m in models}
            rankings[str(h)] = {}
            for metric in bayes.COMPARED_METRICS:
                decisions = []
                for a, b in combinations(models, 2):
                    diffs = bayes.PairedDiffs.from_scores(a, [float(r[metric]) for r in per[a]],
                                                          b, [float(r[metric]) for r in per[b]],
                                                          metric, self.config.rho)
                    d = bayes.compare(diffs, self.config.rope, self.config.threshold)
                    decisions.append(d)
                    rows.append([self.hash, h, metric, a, b] + [_fmt(x) for x in (
                        d.location, d.scale, d.dof, d.rho, d.rope, d.p_left, d.p_rope, d.p_right)]
                        + [d.verdict, d.lean])
                rankings[str(h)][metric] = bayes.build_ranking(decisions).to_dict()
        _write_csv(self.dir / "decisions.csv", DECISION_COLUMNS, rows)
        _write_json(self.dir / "ranking.json", {"config_hash": self.hash, "rankings": rankings})
        return ["decisions.csv", "ranking.json"]

    def stage_report(self) -> list[str]:
        metrics = read_csv(self.dir / "metrics.csv")
        text, table_csv = report.render_metric_table(metrics, list(self.config.models))
        header = f"config {self.hash}\n\n"
        (self.dir / "tables.txt").write_text(header + text)
        (self.dir / "tables.csv").write_text(table_csv)
        doc = json.loads((self.dir / "ranking.json").read_text())
        (self.dir / "rankings.txt").write_text(header + report.render_rankings(doc))
        svg = report.render_radar(report.radar_summary(metrics))
        (self.dir / "radar.svg").write_text(svg.replace("<svg ", f'<svg data-config-hash="{self.hash}" ', 1))
        return ["tables.txt", "tables.csv", "rankings.txt", "radar.svg"]


def _train_job(config_json: str, kind: str, horizon: int) -> tuple[str, dict]:
    return Run(ExperimentConfig.from_dict(json.loads(config_json))).train_one(kind, horizon)


def run(config: ExperimentConfig, last: str = "report") -> Path:
    Run(config).run_through(last)
    return Path(config.out_dir)


__all__ = ["DataError", "NonFiniteError", "Run", "STAGES", "StageError", "read_csv", "run"]
