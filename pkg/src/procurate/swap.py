"""Segment merging and transcript-to-recipe-step swapping.

Short neighboring ASR segments are merged into utterances worth
embedding, each merged utterance is matched against a pool of recipe
step embeddings, and confident matches replace the spoken text with the
written step while keeping the source timestamps. Runs of neighboring
matches that land on the same step collapse into one span.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import AsrSegment, Recipe, StepRef, VideoRecord
from .embedindex import EmbeddingMatrix, query
from .sieve import SplitTag

log = logging.getLogger(__name__)

MAX_MERGE_DURATION_S = 8.0
MAX_MERGE_GAP_S = 4.0
MIN_SWAP_SIMILARITY = 0.75

_STEP_ID_SEP = "::"


class SegmentAlignmentError(ValueError):
    """Embedding rows do not line up with a video's merged segments."""


@dataclass(frozen=True)
class MergeEvent:
    """One merge decision, recorded for auditing."""

    left_duration_s: float
    right_duration_s: float
    gap_s: float


@dataclass(frozen=True)
class MergedSegment:
    text: str
    start_s: float
    end_s: float
    source_indices: tuple[int, ...]  # positions in the original segment list

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class SwapSegment:
    step: StepRef
    text: str  # the recipe step, verbatim
    start_s: float
    end_s: float
    similarity: float
    source_segment_indices: tuple[int, ...]


@dataclass(frozen=True)
class CuratedVideo:
    video_id: str
    title: str
    split: SplitTag
    segments: tuple[SwapSegment, ...]
    source_segment_count: int  # raw ASR segments before merging


def merge_with_sources(
    segments: Sequence[AsrSegment],
    max_duration_s: float = MAX_MERGE_DURATION_S,
    max_gap_s: float = MAX_MERGE_GAP_S,
    trace: list[MergeEvent] | None = None,
) -> list[MergedSegment]:
    """Greedy left-to-right merge keeping source index provenance.

    The running segment absorbs its right neighbor while both spans are
    shorter than `max_duration_s` and the gap between them is under
    `max_gap_s` (both strict). The absorbed pair becomes the new running
    segment, so chains can form until the merged span grows too long.
    Texts join with one space; the merged span covers min start to max
    end of its sources.
    """
    merged: list[MergedSegment] = []
    for idx, seg in enumerate(segments):
        if merged:
            cur = merged[-1]
            gap = max(0.0, seg.start_s - cur.end_s)
            if (
                cur.duration_s < max_duration_s
                and seg.duration_s < max_duration_s
                and gap < max_gap_s
            ):
                if trace is not None:
                    trace.append(MergeEvent(cur.duration_s, seg.duration_s, gap))
                merged[-1] = MergedSegment(
                    text=cur.text + " " + seg.text,
                    start_s=cur.start_s,
                    end_s=max(cur.end_s, seg.end_s),
                    source_indices=cur.source_indices + (idx,),
                )
                continue
        merged.append(MergedSegment(seg.text, seg.start_s, seg.end_s, (idx,)))
    return merged


def merge_segments(
    segments: Sequence[AsrSegment],
    max_duration_s: float = MAX_MERGE_DURATION_S,
    max_gap_s: float = MAX_MERGE_GAP_S,
    trace: list[MergeEvent] | None = None,
) -> list[AsrSegment]:
    """Merged segments as plain AsrSegments, provenance discarded."""
    return [
        AsrSegment(text=m.text, start_s=m.start_s, end_s=m.end_s)
        for m in merge_with_sources(segments, max_duration_s, max_gap_s, trace)
    ]


# -- step identity ----------------------------------------------------------

def step_id(recipe_id: str, step_index: int) -> str:
    """Stable embedding id for one recipe step."""
    return f"{recipe_id}{_STEP_ID_SEP}{step_index}"


def parse_step_id(value: str) -> StepRef:
    recipe_id, _, index = value.rpartition(_STEP_ID_SEP)
    if not recipe_id or not index.isdigit():
        raise ValueError(f"not a step id: {value!r}")
    return StepRef(recipe_id=recipe_id, step_index=int(index))


class StepCatalog:
    """Lookup from step id to (StepRef, step text)."""

    def __init__(self, entries: Mapping[str, tuple[StepRef, str]]):
        self._entries = dict(entries)

    @classmethod
    def from_recipes(cls, recipes: Iterable[Recipe]) -> "StepCatalog":
        entries = {}
        for recipe in recipes:
            for i, text in enumerate(recipe.steps):
                entries[step_id(recipe.recipe_id, i)] = (
                    StepRef(recipe.recipe_id, i),
                    text,
                )
        return cls(entries)

    def __contains__(self, sid: str) -> bool:
        return sid in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def ids(self) -> list[str]:
        return list(self._entries)

    def ref(self, sid: str) -> StepRef:
        return self._entries[sid][0]

    def text(self, sid: str) -> str:
        return self._entries[sid][1]

    def ids_for_recipes(self, recipe_ids) -> list[str]:
        wanted = set(recipe_ids)
        return [sid for sid, (ref, _) in self._entries.items() if ref.recipe_id in wanted]


# -- swapping ---------------------------------------------------------------

def _collapse_consecutive(candidates: list[SwapSegment]) -> list[SwapSegment]:
    # neighbors that matched the same step become one span; similarity
    # keeps the best of the run
    out: list[SwapSegment] = []
    for seg in candidates:
        if out and out[-1].step == seg.step:
            prev = out[-1]
            out[-1] = SwapSegment(
                step=prev.step,
                text=prev.text,
                start_s=min(prev.start_s, seg.start_s),
                end_s=max(prev.end_s, seg.end_s),
                similarity=max(prev.similarity, seg.similarity),
                source_segment_indices=prev.source_segment_indices + seg.source_segment_indices,
            )
        else:
            out.append(seg)
    return out


def swap_video(
    video: VideoRecord,
    split: SplitTag,
    segment_vectors: np.ndarray,
    step_index: EmbeddingMatrix,
    catalog: StepCatalog,
    min_similarity: float = MIN_SWAP_SIMILARITY,
    max_merge_duration_s: float = MAX_MERGE_DURATION_S,
    max_merge_gap_s: float = MAX_MERGE_GAP_S,
) -> CuratedVideo:
    """Replace a video's transcript with its nearest recipe steps.

    `segment_vectors` must hold one embedding per merged segment, in
    merge order; a count mismatch raises SegmentAlignmentError because
    silently misaligned vectors would swap in unrelated steps. Matches
    below `min_similarity` are discarded before the collapse pass, so a
    weak match between two strong ones on the same step does not break
    the run. A video can legitimately end up with zero segments.
    """
    merged = merge_with_sources(video.segments, max_merge_duration_s, max_merge_gap_s)
    vectors = np.asarray(segment_vectors)
    if vectors.ndim != 2 or vectors.shape[0] != len(merged):
        raise SegmentAlignmentError(
            f"{video.video_id}: {vectors.shape[0] if vectors.ndim == 2 else 'malformed'}"
            f" embedding rows for {len(merged)} merged segments"
        )

    candidates: list[SwapSegment] = []
    for seg, vector in zip(merged, vectors):
        hits = query(step_index, vector, 1)
        if not hits or hits[0].similarity < min_similarity:
            continue
        hit = hits[0]
        candidates.append(
            SwapSegment(
                step=catalog.ref(hit.id),
                text=catalog.text(hit.id),
                start_s=seg.start_s,
                end_s=seg.end_s,
                similarity=hit.similarity,
                source_segment_indices=seg.source_indices,
            )
        )

    return CuratedVideo(
        video_id=video.video_id,
        title=video.title,
        split=split,
        segments=tuple(_collapse_consecutive(candidates)),
        source_segment_count=len(video.segments),
    )


# -- output -----------------------------------------------------------------

def curated_to_obj(video: CuratedVideo) -> dict:
    return {
        "video_id": video.video_id,
        "title": video.title,
        "split": video.split.value,
        "segments": [
            {
                "recipe_id": s.step.recipe_id,
                "step_index": s.step.step_index,
                "text": s.text,
                "start_s": s.start_s,
                "end_s": s.end_s,
                "similarity": s.similarity,
            }
            for s in video.segments
        ],
    }


def emit_dataset(
    curated: Iterable[CuratedVideo],
    out_path,
    config_echo: Mapping | None = None,
    failed_video_ids: Sequence[str] = (),
) -> dict:
    """Write dataset.jsonl (sorted by video_id) and manifest.json.

    Returns the manifest dict. The manifest counts raw ASR segments in
    (`segments_before`) against swapped segments out (`segments_after`),
    flags videos whose segments all fell below the similarity floor, and
    echoes the effective configuration for provenance.
    """
    out_path = Path(out_path)
    videos = sorted(curated, key=lambda v: v.video_id)
    with out_path.open("w", encoding="utf-8") as f:
        for video in videos:
            f.write(json.dumps(curated_to_obj(video), ensure_ascii=False) + "\n")

    manifest = {
        "videos": len(videos),
        "segments_before": sum(v.source_segment_count for v in videos),
        "segments_after": sum(len(v.segments) for v in videos),
        "empty_video_ids": sorted(v.video_id for v in videos if not v.segments),
        "failed_video_ids": sorted(failed_video_ids),
        "config": dict(config_echo) if config_echo else {},
    }
    manifest_path = out_path.parent / "manifest.json"
    manifest_path.write_text(
        json.dumps(manifest, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    log.info(
        "emitted %d videos, %d -> %d segments",
        manifest["videos"],
        manifest["segments_before"],
        manifest["segments_after"],
    )
    return manifest
