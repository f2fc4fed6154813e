"""Pairing videos with candidate recipes and thinning the pairs.

Two passes. The title pass links a video to every recipe whose title
shares at least one content lemma with the video title. The content
pass scores each pair on transcript-vs-steps lexical overlap and keeps
pairs clearing both thresholds; a video whose best overlap is high
enough lands in the validation split, everything else trains.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Iterable, Mapping

from .corpus import Recipe, VideoRecord
from .textnorm import Stoplist, TokenSet, content_words

log = logging.getLogger(__name__)

MIN_TOKEN_IOU = 0.1
MIN_TOKEN_RECALL = 0.3
MIN_VALIDATION_IOU = 0.2


class SplitTag(str, enum.Enum):
    TRAIN = "train"
    VALIDATION = "validation"


@dataclass(frozen=True)
class PairScore:
    video_id: str
    recipe_id: str
    token_iou: float
    token_recall: float


@dataclass(frozen=True)
class TitlePairing:
    pairs: tuple[tuple[str, str], ...]  # (video_id, recipe_id), sorted
    video_ids: frozenset[str]
    recipe_ids: frozenset[str]


@dataclass(frozen=True)
class SieveResult:
    kept: tuple[PairScore, ...]
    video_ids: frozenset[str]
    recipe_ids: frozenset[str]


def pair_by_title(
    videos: Iterable[VideoRecord],
    recipes: Iterable[Recipe],
    stoplist: Stoplist,
) -> TitlePairing:
    """All (video, recipe) pairs whose titles share a content lemma.

    Built through an inverted lemma index rather than the cross
    product, so runtime scales with actual overlap. Pair order is
    (video_id, recipe_id) ascending.
    """
    by_lemma: dict[str, list[str]] = {}
    for recipe in recipes:
        for lemma in content_words(recipe.title, stoplist):
            by_lemma.setdefault(lemma, []).append(recipe.recipe_id)

    pairs = set()
    for video in videos:
        for lemma in content_words(video.title, stoplist):
            for recipe_id in by_lemma.get(lemma, ()):
                pairs.add((video.video_id, recipe_id))

    ordered = tuple(sorted(pairs))
    return TitlePairing(
        pairs=ordered,
        video_ids=frozenset(v for v, _ in ordered),
        recipe_ids=frozenset(r for _, r in ordered),
    )


def score_token_sets(
    video_id: str, recipe_id: str, transcript: TokenSet, steps: TokenSet
) -> PairScore:
    """Overlap scores from precomputed content-word sets.

    token_iou is |intersection| / |union| (0 when both sets are empty).
    token_recall divides by the recipe side: it asks how much of the
    written recipe the spoken transcript covers, not the reverse.
    """
    inter = len(transcript & steps)
    union = len(transcript | steps)
    return PairScore(
        video_id=video_id,
        recipe_id=recipe_id,
        token_iou=inter / union if union else 0.0,
        token_recall=inter / len(steps) if steps else 0.0,
    )


def score_pair(video: VideoRecord, recipe: Recipe, stoplist: Stoplist) -> PairScore:
    """Score one pair from raw records: all ASR text against all steps."""
    transcript = content_words(" ".join(s.text for s in video.segments), stoplist)
    steps = content_words(" ".join(recipe.steps), stoplist)
    return score_token_sets(video.video_id, recipe.recipe_id, transcript, steps)


def sieve_content(
    scores: Iterable[PairScore],
    min_iou: float = MIN_TOKEN_IOU,
    min_recall: float = MIN_TOKEN_RECALL,
) -> SieveResult:
    """Keep pairs meeting both thresholds (boundaries inclusive)."""
    kept = tuple(
        s for s in scores if s.token_iou >= min_iou and s.token_recall >= min_recall
    )
    result = SieveResult(
        kept=kept,
        video_ids=frozenset(s.video_id for s in kept),
        recipe_ids=frozenset(s.recipe_id for s in kept),
    )
    log.info("content sieve kept %d pairs, %d videos", len(kept), len(result.video_ids))
    return result


def split_train_val(
    kept: Iterable[PairScore],
    min_validation_iou: float = MIN_VALIDATION_IOU,
) -> dict[str, SplitTag]:
    """Assign each surviving video a split by its best token_iou.

    A video goes to validation when the maximum token_iou over its kept
    pairs reaches the threshold (inclusive), so the validation set holds
    the videos that track some recipe most closely.
    """
    best: dict[str, float] = {}
    for score in kept:
        prev = best.get(score.video_id)
        if prev is None or score.token_iou > prev:
            best[score.video_id] = score.token_iou
    return {
        video_id: SplitTag.VALIDATION if top >= min_validation_iou else SplitTag.TRAIN
        for video_id, top in best.items()
    }
