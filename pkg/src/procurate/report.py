"""Dataset statistics and raw-vs-curated word distribution reports."""

from __future__ import annotations

import csv
import json
import logging
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Recipe, VideoRecord
from .textnorm import Stoplist, content_lemmas, tokenize

log = logging.getLogger(__name__)

#: Published corpus-scale numbers, kept in every report for context. They
#: describe the full-size corpus the method was developed on; nothing in
#: this package asserts the data at hand against them.
FULL_SCALE_REFERENCE = {
    "segments_before": 2_750_000,
    "segments_after": 510_000,
    "train_videos": 48_000,
    "validation_videos": 3_000,
    "distinct_recipes": 4_109,
    "steps_per_video_mean": 10.6,
    "segment_duration_s_mean": 11.83,
    "video_duration_s_mean": 310.5,
}

TOP_RECIPE_COUNT = 50

SEGMENT_DURATION_BIN_S = 1.0
VIDEO_DURATION_BIN_S = 10.0


class ReportError(ValueError):
    """Raised when report inputs are inconsistent."""


def _fmt_edge(edge: float) -> str:
    return str(int(edge)) if float(edge).is_integer() else repr(edge)


@dataclass(frozen=True)
class Histogram:
    """Fixed-width histogram keyed by lower bin edge, plus the raw mean."""

    bin_width: float
    counts: tuple[tuple[float, int], ...]
    mean: float
    total: int

    @classmethod
    def of(cls, values: Iterable[float], bin_width: float) -> "Histogram":
        vals = list(values)
        binned = Counter(math.floor(v / bin_width) * bin_width for v in vals)
        return cls(
            bin_width=bin_width,
            counts=tuple(sorted(binned.items())),
            mean=sum(vals) / len(vals) if vals else 0.0,
            total=len(vals),
        )

    def to_obj(self) -> dict:
        return {
            "bin_width": self.bin_width,
            "mean": self.mean,
            "total": self.total,
            "counts": {_fmt_edge(e): c for e, c in self.counts},
        }


@dataclass(frozen=True)
class DatasetReport:
    video_count: int
    segment_count_before: int
    segment_count_after: int
    reduction_ratio: float
    unique_recipes_used: int
    top_recipe_titles: tuple[tuple[str, int], ...]
    steps_per_video: Histogram
    segment_duration_s: Histogram
    video_duration_s: Histogram
    words_per_step: Histogram

    def to_obj(self) -> dict:
        return {
            "video_count": self.video_count,
            "segment_count_before": self.segment_count_before,
            "segment_count_after": self.segment_count_after,
            "reduction_ratio": self.reduction_ratio,
            "unique_recipes_used": self.unique_recipes_used,
            "top_recipe_titles": [
                {"title": t, "count": c} for t, c in self.top_recipe_titles
            ],
            "steps_per_video": self.steps_per_video.to_obj(),
            "segment_duration_s": self.segment_duration_s.to_obj(),
            "video_duration_s": self.video_duration_s.to_obj(),
            "words_per_step": self.words_per_step.to_obj(),
            "full_scale_reference": dict(FULL_SCALE_REFERENCE),
        }


def load_dataset(path) -> list[dict]:
    """Read a curated dataset.jsonl back into wire dicts.

    This is our own output format, so validation is minimal but failures
    still point at the offending line.
    """
    path = Path(path)
    rows: list[dict] = []
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ReportError(f"{where}: not valid JSON ({e.msg})") from e
            if not isinstance(obj, dict) or not {
                "video_id", "title", "split", "segments"
            } <= obj.keys():
                raise ReportError(f"{where}: not a curated video record")
            vid = obj["video_id"]
            if vid in seen:
                raise ReportError(f"{where}: duplicate video_id {vid!r}")
            seen.add(vid)
            rows.append(obj)
    return rows


def compute_stats(
    dataset: Sequence[Mapping],
    source: Iterable[VideoRecord],
    recipes: Iterable[Recipe] | None = None,
    top_k: int = TOP_RECIPE_COUNT,
) -> DatasetReport:
    """Summarize a curated dataset against its source videos.

    `dataset` holds the wire dicts from dataset.jsonl, `source` the video
    records the pipeline ingested. Every dataset video must exist in the
    source corpus. Recipe records are optional and only improve the top
    recipes table: with them, counts are grouped by recipe title (several
    recipes can share one), without them the recipe id stands in.
    """
    by_id = {v.video_id: v for v in source}
    missing = sorted({row["video_id"] for row in dataset} - by_id.keys())
    if missing:
        raise ReportError(
            "dataset videos missing from source corpus: " + ", ".join(missing)
        )

    title_of = {r.recipe_id: r.title for r in recipes} if recipes else {}

    sources = [by_id[row["video_id"]] for row in dataset]
    segs = [s for row in dataset for s in row["segments"]]
    before = sum(len(v.segments) for v in sources)
    after = len(segs)

    usage = Counter(title_of.get(s["recipe_id"], s["recipe_id"]) for s in segs)
    top = sorted(usage.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]

    return DatasetReport(
        video_count=len(dataset),
        segment_count_before=before,
        segment_count_after=after,
        reduction_ratio=after / before if before else 0.0,
        unique_recipes_used=len({s["recipe_id"] for s in segs}),
        top_recipe_titles=tuple(top),
        steps_per_video=Histogram.of(
            (len(row["segments"]) for row in dataset), 1
        ),
        segment_duration_s=Histogram.of(
            (s["end_s"] - s["start_s"] for s in segs), SEGMENT_DURATION_BIN_S
        ),
        video_duration_s=Histogram.of(
            (v.duration_s for v in sources), VIDEO_DURATION_BIN_S
        ),
        words_per_step=Histogram.of((len(tokenize(s["text"])) for s in segs), 1),
    )


@dataclass(frozen=True)
class WordDeltaReport:
    """Per-lemma frequency shift between raw transcripts and curated text.

    `rows` carries (lemma, count_raw, count_curated, delta) sorted by
    absolute delta descending then lemma; a lemma appears only if some
    corpus contains it. The per-sentence content-word counts feed density
    plots downstream and are emitted verbatim.
    """

    rows: tuple[tuple[str, int, int, int], ...]
    sentence_counts_raw: tuple[int, ...]
    sentence_counts_curated: tuple[int, ...]


def compute_word_deltas(
    source: Iterable[VideoRecord],
    dataset: Sequence[Mapping],
    stoplist: Stoplist | None = None,
) -> WordDeltaReport:
    stoplist = stoplist or Stoplist.default()
    raw_counts: Counter = Counter()
    curated_counts: Counter = Counter()
    raw_sentences: list[int] = []
    curated_sentences: list[int] = []

    for video in source:
        for seg in video.segments:
            lemmas = content_lemmas(seg.text, stoplist)
            raw_counts.update(lemmas)
            raw_sentences.append(len(lemmas))
    for row in dataset:
        for seg in row["segments"]:
            lemmas = content_lemmas(seg["text"], stoplist)
            curated_counts.update(lemmas)
            curated_sentences.append(len(lemmas))

    lemmas = raw_counts.keys() | curated_counts.keys()
    rows = sorted(
        (
            (lemma, raw_counts[lemma], curated_counts[lemma],
             curated_counts[lemma] - raw_counts[lemma])
            for lemma in lemmas
        ),
        key=lambda r: (-abs(r[3]), r[0]),
    )
    return WordDeltaReport(
        rows=tuple(rows),
        sentence_counts_raw=tuple(raw_sentences),
        sentence_counts_curated=tuple(curated_sentences),
    )


def write_report(report: DatasetReport, path) -> None:
    Path(path).write_text(
        json.dumps(report.to_obj(), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )


def write_word_deltas(report: WordDeltaReport, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["lemma", "count_raw", "count_curated", "delta"])
        w.writerows(report.rows)


def write_sentence_counts(report: WordDeltaReport, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["corpus", "content_word_count"])
        w.writerows(("raw", n) for n in report.sentence_counts_raw)
        w.writerows(("curated", n) for n in report.sentence_counts_curated)
    log.debug(
        "sentence counts: %d raw, %d curated",
        len(report.sentence_counts_raw),
        len(report.sentence_counts_curated),
    )
