"""Command line entry point: embed a JSONL text file into .sseb/.ids."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .encoders import DEFAULT_MODEL, EncoderError, get_encoder
from .job import EmbedJob, InputError, run_job

_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging() -> None:
    wanted = os.environ.get("EMBEDDER_LOG", "info").lower()
    if wanted not in _LEVELS:
        print(f"embed: ignoring EMBEDDER_LOG={wanted!r}", file=sys.stderr)
        wanted = "error"
    logging.basicConfig(
        level=_LEVELS[wanted],
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed",
        description="Embed sentences from a JSONL file into a binary vector file.",
    )
    parser.add_argument("--in", dest="input", required=True, metavar="texts.jsonl",
                        help='JSON lines of {"id": ..., "text": ...}')
    parser.add_argument("--out", required=True, metavar="emb.sseb",
                        help="output vector file")
    parser.add_argument("--ids", required=True, metavar="emb.ids",
                        help="output id list, one per line")
    parser.add_argument("--model", default=DEFAULT_MODEL,
                        help="encoder id (default %(default)s); hashed/<dim> for"
                             " the model-free test encoder")
    parser.add_argument("--batch", type=int, default=64, help="batch size (default 64)")
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)

    input_path = Path(args.input)
    try:
        if args.batch < 1:
            raise EncoderError(f"batch size must be positive, got {args.batch}")
        if not input_path.is_file():
            raise EncoderError(f"input file not found: {input_path}")
        encoder = get_encoder(args.model)
    except EncoderError as exc:
        print(f"embed: {exc}", file=sys.stderr)
        return 2

    job = EmbedJob(
        input_path=input_path,
        data_path=Path(args.out),
        ids_path=Path(args.ids),
        model_id=args.model,
        batch_size=args.batch,
    )
    try:
        run_job(job, encoder)
    except (InputError, OSError) as exc:
        print(f"embed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
