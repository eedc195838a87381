"""Command-line entry point.

Each verb runs the pipeline up to and including its stage, skipping stages a
previous invocation already finished in the same output directory.

Exit codes: 0 success, 1 config error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .autodiff import NonFiniteError
from .config import ConfigError, ExperimentConfig
from .data import BookValidationError, MalformedRowError
from .runner import STAGES, DataError, Run, StageError

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
VERBS = STAGES + ("run-all",)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lobbench", description="Mid-price movement benchmark on order book data.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config (JSON); defaults are used when omitted")
    common.add_argument("--seed", type=int, help="global seed")
    common.add_argument("--out", help="run directory")
    common.add_argument("--workers", type=int, help="parallel training jobs")
    common.add_argument("--fold-size", type=int, help="test fold length in windows")
    common.add_argument("--rope", type=float, help="half-width of the practical-equivalence region")
    common.add_argument("--rho", type=float, help="fold correlation for the posterior (default 1/folds)")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True)
    for verb in VERBS:
        sp = sub.add_parser(verb, parents=[common])
        if verb == "ingest":
            sp.add_argument("--export-books", action="store_true",
                            help="also write each segment as a 40-column snapshot file under <out>/data")
    return p


def load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    cfg = cfg.with_overrides(seed=args.seed, out_dir=args.out, workers=args.workers, fold_size=args.fold_size,
                             rope=args.rope, rho=args.rho)
    return cfg.validate()


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, StageError):
        exc = exc.cause
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, NonFiniteError):
        return EXIT_NUMERIC
    if isinstance(exc, (DataError, MalformedRowError, BookValidationError, OSError, ValueError)):
        return EXIT_DATA
    return EXIT_NUMERIC if isinstance(exc, FloatingPointError) else EXIT_DATA


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        run = Run(load_config(args))
        last = "report" if args.verb == "run-all" else args.verb
        done = run.run_through(last)
        if args.verb == "ingest" and args.export_books:
            for path in run.export_books():
                print(path)
    except Exception as exc:  # noqa: BLE001 - mapped to an exit code
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    print(f"{run.dir}: ran {', '.join(done) if done else 'nothing (already complete)'}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
