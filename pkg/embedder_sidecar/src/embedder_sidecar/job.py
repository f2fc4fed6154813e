"""Reading embed jobs and running them."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .sseb import write_sseb

log = logging.getLogger(__name__)


class InputError(ValueError):
    """The input file cannot be embedded as given."""


@dataclass(frozen=True)
class EmbedJob:
    input_path: Path
    data_path: Path
    ids_path: Path
    model_id: str
    batch_size: int


def read_texts(path) -> list[tuple[str, str]]:
    """Parse {"id", "text"} JSON lines, preserving order.

    Duplicate ids abort the job: two rows under one id would leave the
    output silently ambiguous. Empty texts are allowed but flagged,
    since they usually mean an upstream extraction bug.
    """
    path = Path(path)
    seen: dict[str, int] = {}
    out: list[tuple[str, str]] = []
    with path.open(encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path.name}:{lineno}: invalid JSON: {exc}") from None
            if not isinstance(obj, dict):
                raise InputError(f"{path.name}:{lineno}: expected an object")
            text_id = obj.get("id")
            text = obj.get("text")
            if not isinstance(text_id, str) or not text_id:
                raise InputError(f"{path.name}:{lineno}: missing or empty id")
            if "\n" in text_id or "\r" in text_id:
                raise InputError(f"{path.name}:{lineno}: id contains a line break")
            if not isinstance(text, str):
                raise InputError(f"{path.name}:{lineno}: missing text for id {text_id!r}")
            if text_id in seen:
                raise InputError(
                    f"{path.name}:{lineno}: duplicate id {text_id!r}"
                    f" (first seen on line {seen[text_id]})"
                )
            seen[text_id] = lineno
            if not text.strip():
                log.warning("%s:%d: empty text for id %s", path.name, lineno, text_id)
            out.append((text_id, text))
    return out


def run_job(job: EmbedJob, encoder) -> int:
    """Embed the job's texts and write .sseb + .ids. Returns the row count.

    Each distinct text is encoded once and its row reused, so duplicate
    texts come out bitwise identical no matter how batches fall.
    """
    records = read_texts(job.input_path)
    unique = list(dict.fromkeys(text for _, text in records))

    by_text: dict[str, np.ndarray] = {}
    for lo in range(0, len(unique), job.batch_size):
        chunk = unique[lo:lo + job.batch_size]
        rows = encoder.encode_batch(chunk)
        for text, row in zip(chunk, rows):
            by_text[text] = row

    ids = [text_id for text_id, _ in records]
    if records:
        matrix = np.stack([by_text[text] for _, text in records])
    else:
        matrix = np.empty((0, encoder.dim), dtype=np.float32)
    write_sseb(job.data_path, job.ids_path, ids, matrix, encoder.dim)
    log.info(
        "embedded %d texts (%d distinct) at dim %d -> %s",
        len(records), len(unique), encoder.dim, job.data_path,
    )
    return len(records)
