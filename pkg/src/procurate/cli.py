"""Command line front end.

Every subcommand takes the same flags: an optional JSON config file plus
one override flag per config field, flag winning over file. Exit codes:
0 success, 1 runtime failure, 2 bad configuration or failed validation.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .corpus import CorpusError
from .embedindex import EmbeddingFormatError
from .pipeline import (
    PipelineError,
    run_pipeline,
    run_sieve_content,
    run_sieve_titles,
    run_stats,
    run_swap,
    run_validate,
)
from .report import ReportError

log = logging.getLogger(__name__)

_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging() -> None:
    name = os.environ.get("PROCURATE_LOG", "error").lower()
    level = _LOG_LEVELS.get(name)
    if level is None:
        print(
            f"procurate: ignoring PROCURATE_LOG={name!r} "
            f"(expected one of {', '.join(_LOG_LEVELS)})",
            file=sys.stderr,
        )
        level = logging.ERROR
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file")
    common.add_argument("--videos", type=Path, help="video corpus (JSONL)")
    common.add_argument("--recipes", type=Path, help="recipe corpus (JSONL)")
    common.add_argument("--step-emb", type=Path, help="recipe step embeddings (.sseb)")
    common.add_argument("--seg-emb", type=Path, help="merged segment embeddings (.sseb)")
    common.add_argument("--out-dir", type=Path, help="output directory")
    common.add_argument("--function-words", type=Path, help="function word stoplist")
    common.add_argument("--generic-words", type=Path, help="generic recipe word stoplist")
    common.add_argument("--max-duration", type=float, dest="max_duration_s",
                        help="source filter: max video duration in seconds")
    common.add_argument("--min-per-category", type=int,
                        help="source filter: min videos per category")
    common.add_argument("--iou", type=float, dest="min_token_iou",
                        help="content sieve token-IoU threshold")
    common.add_argument("--recall", type=float, dest="min_token_recall",
                        help="content sieve token-recall threshold")
    common.add_argument("--val-iou", type=float, dest="val_token_iou",
                        help="token-IoU at or above which a video goes to validation")
    common.add_argument("--sim", type=float, dest="min_similarity",
                        help="retrieval similarity floor")
    common.add_argument("--merge-max-dur", type=float, dest="merge_max_duration_s",
                        help="merge only segments shorter than this many seconds")
    common.add_argument("--merge-max-gap", type=float, dest="merge_max_gap_s",
                        help="merge only across gaps shorter than this many seconds")
    common.add_argument("--pool", choices=("global", "paired"), dest="retrieval_pool",
                        help="retrieve from all sieved recipes or per-video pairs")
    strictness = common.add_mutually_exclusive_group()
    strictness.add_argument("--strict", dest="strict_ingest", action="store_true",
                            default=None, help="abort on any malformed input record")
    strictness.add_argument("--lenient", dest="strict_ingest", action="store_false",
                            default=None, help="drop and count malformed input records")
    common.add_argument("--workers", type=int, default=1,
                        help="parallel video workers (output is identical for any count)")

    parser = argparse.ArgumentParser(
        prog="procurate",
        description="Curate an instructional-video corpus against a recipe corpus.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sieve-titles", parents=[common],
                   help="filter the source corpus and score title-overlap pairs")
    sub.add_parser("sieve-content", parents=[common],
                   help="threshold pair scores and assign train/validation splits")
    sub.add_parser("swap", parents=[common],
                   help="merge segments, retrieve steps, emit the curated dataset")
    sub.add_parser("stats", parents=[common],
                   help="summarize a curated dataset and its word-frequency shifts")
    sub.add_parser("pipeline", parents=[common], help="run all stages in order")
    sub.add_parser("validate", parents=[common],
                   help="re-check an emitted dataset against the output invariants")
    return parser


_CONFIG_FLAGS = (
    "videos", "recipes", "step_emb", "seg_emb", "out_dir",
    "function_words", "generic_words",
    "max_duration_s", "min_per_category",
    "min_token_iou", "min_token_recall", "val_token_iou", "min_similarity",
    "merge_max_duration_s", "merge_max_gap_s",
    "retrieval_pool", "strict_ingest",
)


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = _build_parser().parse_args(argv)
    command = args.command

    try:
        if args.workers < 1:
            raise ConfigError(f"--workers must be at least 1, got {args.workers}")
        overrides = {name: getattr(args, name) for name in _CONFIG_FLAGS}
        cfg = load_config(args.config, overrides)
        Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)

        if command == "sieve-titles":
            run_sieve_titles(cfg, args.workers)
        elif command == "sieve-content":
            run_sieve_content(cfg)
        elif command == "swap":
            run_swap(cfg, args.workers)
        elif command == "stats":
            run_stats(cfg)
        elif command == "pipeline":
            run_pipeline(cfg, args.workers)
        elif command == "validate":
            violations = run_validate(cfg)
            if violations:
                for v in violations:
                    print(f"validate: {v}", file=sys.stderr)
                print(f"validate: {len(violations)} violations", file=sys.stderr)
                return 2
    except ConfigError as e:
        print(f"{command}: {e}", file=sys.stderr)
        return 2
    except (PipelineError, CorpusError, EmbeddingFormatError, ReportError, OSError) as e:
        print(f"{command}: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
