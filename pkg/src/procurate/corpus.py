"""Source corpus records and streaming JSONL ingestion.

Videos arrive as one JSON object per line with ASR segments; recipes as
one object per line with ordered step strings. Parsers are generators,
so multi-gigabyte files are never materialized. Strict mode aborts on
the first malformed line; lenient mode drops it, counts it and moves on.
Duplicate ids abort in both modes.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

log = logging.getLogger(__name__)

# a segment may overhang its video's nominal duration by this much
DURATION_SLACK_S = 1.0


class CorpusError(ValueError):
    """Malformed input that strict parsing refuses to skip."""


class DuplicateIdError(CorpusError):
    """The same video_id or recipe_id appeared twice."""


@dataclass(frozen=True)
class AsrSegment:
    text: str
    start_s: float
    end_s: float

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class VideoRecord:
    video_id: str
    title: str
    duration_s: float
    category: str
    segments: tuple[AsrSegment, ...]  # sorted by (start_s, end_s)


@dataclass(frozen=True)
class Recipe:
    recipe_id: str
    title: str
    steps: tuple[str, ...]  # ordered, no empty strings


@dataclass(frozen=True)
class StepRef:
    recipe_id: str
    step_index: int  # 0-based position in Recipe.steps


@dataclass
class ParseStats:
    """Counters filled in by the parsers, mostly useful in lenient mode."""

    lines: int = 0
    records: int = 0
    rejected_lines: int = 0
    dropped_segments: int = 0
    dropped_steps: int = 0


def _require(obj: dict, key: str, kind, where: str):
    if key not in obj:
        raise CorpusError(f"{where}: missing field {key!r}")
    value = obj[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise CorpusError(f"{where}: field {key!r} must be a number")
        return float(value)
    if not isinstance(value, kind):
        raise CorpusError(f"{where}: field {key!r} must be {kind.__name__}")
    return value


def _video_from_obj(obj: dict, where: str, stats: ParseStats, strict: bool) -> VideoRecord:
    video_id = _require(obj, "video_id", str, where)
    title = _require(obj, "title", str, where)
    duration = _require(obj, "duration_s", float, where)
    category = _require(obj, "category", str, where)
    raw_segments = _require(obj, "segments", list, where)
    if not video_id:
        raise CorpusError(f"{where}: empty video_id")
    if duration <= 0:
        raise CorpusError(f"{where}: duration_s must be positive, got {duration}")
    if not category.strip():
        raise CorpusError(f"{where}: empty category")

    segments = []
    for i, raw in enumerate(raw_segments):
        seg_where = f"{where} segment {i}"
        if not isinstance(raw, dict):
            raise CorpusError(f"{seg_where}: not an object")
        text = _require(raw, "text", str, seg_where).strip()
        start = _require(raw, "start_s", float, seg_where)
        end = _require(raw, "end_s", float, seg_where)
        if not text or start < 0 or not start < end or end > duration + DURATION_SLACK_S:
            if strict:
                raise CorpusError(f"{seg_where}: invalid segment")
            stats.dropped_segments += 1
            log.debug("dropping segment: %s", seg_where)
            continue
        segments.append(AsrSegment(text=text, start_s=start, end_s=end))
    segments.sort(key=lambda s: (s.start_s, s.end_s))
    return VideoRecord(
        video_id=video_id,
        title=title,
        duration_s=duration,
        category=category,
        segments=tuple(segments),
    )


def _recipe_from_obj(obj: dict, where: str, stats: ParseStats, strict: bool) -> Recipe:
    recipe_id = _require(obj, "recipe_id", str, where)
    title = _require(obj, "title", str, where)
    raw_steps = _require(obj, "steps", list, where)
    if not recipe_id:
        raise CorpusError(f"{where}: empty recipe_id")
    steps = []
    for i, raw in enumerate(raw_steps):
        if not isinstance(raw, str):
            raise CorpusError(f"{where} step {i}: not a string")
        stripped = raw.strip()
        if stripped:
            steps.append(stripped)
        else:
            stats.dropped_steps += 1
    if not steps:
        raise CorpusError(f"{where}: no non-empty steps")
    return Recipe(recipe_id=recipe_id, title=title, steps=tuple(steps))


def _parse_jsonl(path, build, id_of, strict, stats):
    stats = stats if stats is not None else ParseStats()
    seen_ids: set[str] = set()
    path = Path(path)
    with path.open("r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            stats.lines += 1
            where = f"{path.name}:{line_no}"
            try:
                stripped = line.strip()
                if not stripped:
                    raise CorpusError(f"{where}: blank line")
                try:
                    obj = json.loads(stripped)
                except json.JSONDecodeError as exc:
                    raise CorpusError(f"{where}: invalid JSON ({exc.msg})") from exc
                if not isinstance(obj, dict):
                    raise CorpusError(f"{where}: line is not a JSON object")
                record = build(obj, where, stats, strict)
            except DuplicateIdError:
                raise
            except CorpusError:
                if strict:
                    raise
                stats.rejected_lines += 1
                log.debug("rejecting line %s", where)
                continue
            rid = id_of(record)
            if rid in seen_ids:
                # duplicates poison downstream joins, so no lenient path here
                raise DuplicateIdError(f"{where}: duplicate id {rid!r}")
            seen_ids.add(rid)
            stats.records += 1
            yield record


def parse_videos(
    path, *, strict: bool = True, stats: ParseStats | None = None
) -> Iterator[VideoRecord]:
    """Stream VideoRecords from a JSONL file.

    Invalid segments (empty text, start >= end, negative start, end past
    duration plus 1 s slack) abort in strict mode and are dropped and
    counted in lenient mode. Segments come out sorted by (start_s, end_s).
    """
    return _parse_jsonl(path, _video_from_obj, lambda r: r.video_id, strict, stats)


def parse_recipes(
    path, *, strict: bool = True, stats: ParseStats | None = None
) -> Iterator[Recipe]:
    """Stream Recipes from a JSONL file. Empty steps are dropped; a recipe
    with no non-empty steps is malformed."""
    return _parse_jsonl(path, _recipe_from_obj, lambda r: r.recipe_id, strict, stats)


def filter_source(
    videos: Iterable[VideoRecord],
    max_duration_s: float = 600.0,
    min_per_category: int = 5,
) -> list[VideoRecord]:
    """Drop overlong videos, then thin out sparse categories.

    Order matters: categories are counted after the duration cut, so a
    category can die because its long videos were removed first. Both
    boundaries are inclusive (duration == max stays, count == min stays).
    Input order is preserved.
    """
    by_duration = [v for v in videos if v.duration_s <= max_duration_s]
    counts: dict[str, int] = {}
    for v in by_duration:
        counts[v.category] = counts.get(v.category, 0) + 1
    return [v for v in by_duration if counts[v.category] >= min_per_category]


# -- serialization helpers, used by tests and fixture tooling ---------------

def video_to_obj(video: VideoRecord) -> dict:
    return {
        "video_id": video.video_id,
        "title": video.title,
        "duration_s": video.duration_s,
        "category": video.category,
        "segments": [
            {"text": s.text, "start_s": s.start_s, "end_s": s.end_s}
            for s in video.segments
        ],
    }


def recipe_to_obj(recipe: Recipe) -> dict:
    return {
        "recipe_id": recipe.recipe_id,
        "title": recipe.title,
        "steps": list(recipe.steps),
    }
