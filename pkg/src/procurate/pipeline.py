"""Stage bodies behind the CLI subcommands.

Every stage reads files and writes files, so composing them by hand is
the same as running `pipeline`: the composition property is structural,
not something the code has to maintain. All emission is sorted, which
keeps outputs byte-stable no matter how many workers ran the middle.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .config import ConfigError, PipelineConfig, config_echo
from .corpus import ParseStats, Recipe, VideoRecord, filter_source, parse_recipes, parse_videos
from .embedindex import EmbeddingMatrix, load_embeddings
from .report import (
    compute_stats,
    compute_word_deltas,
    load_dataset,
    write_report,
    write_sentence_counts,
    write_word_deltas,
)
from .sieve import PairScore, SplitTag, pair_by_title, score_token_sets, sieve_content, split_train_val
from .swap import SegmentAlignmentError, StepCatalog, emit_dataset, merge_segments, swap_video, step_id
from .textnorm import content_words

log = logging.getLogger(__name__)

PAIRS_FILE = "pairs.jsonl"
SPLIT_FILE = "split.jsonl"
DATASET_FILE = "dataset.jsonl"
MANIFEST_FILE = "manifest.json"
REPORT_FILE = "report.json"
WORD_DELTAS_FILE = "word_deltas.csv"
SENTENCE_COUNTS_FILE = "sentence_content_counts.csv"


class PipelineError(RuntimeError):
    """A stage failed at runtime (bad intermediate file, missing rows)."""


def _load_videos(cfg: PipelineConfig) -> list[VideoRecord]:
    cfg.require("videos")
    stats = ParseStats()
    videos = list(parse_videos(cfg.videos, strict=cfg.strict_ingest, stats=stats))
    if stats.rejected_lines or stats.dropped_segments:
        log.info(
            "videos: dropped %d lines, %d segments",
            stats.rejected_lines, stats.dropped_segments,
        )
    return videos


def _load_recipes(cfg: PipelineConfig) -> list[Recipe]:
    cfg.require("recipes")
    stats = ParseStats()
    recipes = list(parse_recipes(cfg.recipes, strict=cfg.strict_ingest, stats=stats))
    if stats.rejected_lines or stats.dropped_steps:
        log.info(
            "recipes: dropped %d lines, %d steps",
            stats.rejected_lines, stats.dropped_steps,
        )
    return recipes


def _ids_path(emb_path) -> Path:
    return Path(emb_path).with_suffix(".ids")


def _out_file(cfg: PipelineConfig, name: str, must_exist: bool = False) -> Path:
    path = Path(cfg.out_dir) / name
    if must_exist and not path.exists():
        raise ConfigError(f"{name} not found in {cfg.out_dir} (run the earlier stages first)")
    if not must_exist:
        path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _write_jsonl(path: Path, objs: Iterable[dict]) -> None:
    with path.open("w", encoding="utf-8") as f:
        for obj in objs:
            f.write(json.dumps(obj, ensure_ascii=False) + "\n")


def _map_maybe_parallel(fn: Callable, items: Sequence, workers: int) -> list:
    """Order-preserving map, threaded when workers > 1."""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# -- sieve-titles -----------------------------------------------------------

def run_sieve_titles(cfg: PipelineConfig, workers: int = 1) -> Path:
    """Source-filter the corpus, pair by title overlap, score every pair.

    Writes pairs.jsonl with one scored row per surviving title pair,
    sorted by (video_id, recipe_id).
    """
    stoplist = cfg.stoplist()
    videos = filter_source(_load_videos(cfg), cfg.max_duration_s, cfg.min_per_category)
    recipes = _load_recipes(cfg)
    pairing = pair_by_title(videos, recipes, stoplist)
    log.info(
        "title sieve: %d videos, %d recipes, %d pairs",
        len(pairing.video_ids), len(pairing.recipe_ids), len(pairing.pairs),
    )

    videos_by_id = {v.video_id: v for v in videos}
    recipes_by_id = {r.recipe_id: r for r in recipes}
    transcript_tokens = {
        vid: content_words(
            " ".join(s.text for s in videos_by_id[vid].segments), stoplist
        )
        for vid in pairing.video_ids
    }
    step_tokens = {
        rid: content_words(" ".join(recipes_by_id[rid].steps), stoplist)
        for rid in pairing.recipe_ids
    }

    def score(pair: tuple[str, str]) -> PairScore:
        vid, rid = pair
        return score_token_sets(vid, rid, transcript_tokens[vid], step_tokens[rid])

    scores = _map_maybe_parallel(score, pairing.pairs, workers)
    out = _out_file(cfg, PAIRS_FILE)
    _write_jsonl(
        out,
        (
            {
                "video_id": s.video_id,
                "recipe_id": s.recipe_id,
                "token_iou": s.token_iou,
                "token_recall": s.token_recall,
            }
            for s in scores
        ),
    )
    return out


def _read_pairs(path: Path) -> list[PairScore]:
    scores: list[PairScore] = []
    with path.open("r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            try:
                obj = json.loads(line)
                scores.append(
                    PairScore(
                        video_id=obj["video_id"],
                        recipe_id=obj["recipe_id"],
                        token_iou=float(obj["token_iou"]),
                        token_recall=float(obj["token_recall"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise PipelineError(f"{path}:{lineno}: bad pair record ({e})") from e
    return scores


# -- sieve-content ----------------------------------------------------------

def run_sieve_content(cfg: PipelineConfig) -> Path:
    """Threshold the scored pairs and split surviving videos.

    Writes split.jsonl mapping each video that kept at least one pair to
    its train/validation assignment.
    """
    pairs_path = _out_file(cfg, PAIRS_FILE, must_exist=True)
    scores = _read_pairs(pairs_path)
    result = sieve_content(scores, cfg.min_token_iou, cfg.min_token_recall)
    splits = split_train_val(result.kept, cfg.val_token_iou)
    log.info(
        "content sieve: %d/%d pairs kept, %d videos (%d validation)",
        len(result.kept), len(scores), len(splits),
        sum(1 for s in splits.values() if s is SplitTag.VALIDATION),
    )
    out = _out_file(cfg, SPLIT_FILE)
    _write_jsonl(
        out,
        (
            {"video_id": vid, "split": splits[vid].value}
            for vid in sorted(splits)
        ),
    )
    return out


def _read_split(path: Path) -> dict[str, SplitTag]:
    splits: dict[str, SplitTag] = {}
    with path.open("r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            try:
                obj = json.loads(line)
                splits[obj["video_id"]] = SplitTag(obj["split"])
            except (json.JSONDecodeError, KeyError, ValueError) as e:
                raise PipelineError(f"{path}:{lineno}: bad split record ({e})") from e
    return splits


# -- swap -------------------------------------------------------------------

def run_swap(cfg: PipelineConfig, workers: int = 1) -> Path:
    """Merge, retrieve, threshold and emit the curated dataset.

    Consumes the sieve outputs plus the two embedding files. A video that
    cannot be processed (missing from the corpus, missing embedding rows)
    is skipped and recorded in the manifest's failed_video_ids rather
    than aborting the whole run.
    """
    cfg.require("videos", "recipes", "step_emb", "seg_emb")
    pairs_path = _out_file(cfg, PAIRS_FILE, must_exist=True)
    split_path = _out_file(cfg, SPLIT_FILE, must_exist=True)

    stoplist = cfg.stoplist()
    videos_by_id = {v.video_id: v for v in _load_videos(cfg)}
    recipes = _load_recipes(cfg)
    catalog = StepCatalog.from_recipes(recipes)

    sieved = sieve_content(
        _read_pairs(pairs_path), cfg.min_token_iou, cfg.min_token_recall
    )
    splits = _read_split(split_path)

    step_matrix = load_embeddings(cfg.step_emb, _ids_path(cfg.step_emb))
    seg_matrix = load_embeddings(cfg.seg_emb, _ids_path(cfg.seg_emb))
    seg_row = {id: i for i, id in enumerate(seg_matrix.ids)}

    paired: dict[str, set[str]] = {}
    for score in sieved.kept:
        paired.setdefault(score.video_id, set()).add(score.recipe_id)

    def pool_for(recipe_ids: Iterable[str]) -> EmbeddingMatrix:
        wanted = sorted(catalog.ids_for_recipes(recipe_ids))
        try:
            return step_matrix.select(wanted)
        except KeyError as e:
            raise PipelineError(f"step embeddings incomplete: {e}") from e

    global_pool = pool_for(sieved.recipe_ids) if cfg.retrieval_pool == "global" else None

    def process(vid: str):
        video = videos_by_id.get(vid)
        if video is None:
            return vid, None
        merged = merge_segments(
            video.segments, cfg.merge_max_duration_s, cfg.merge_max_gap_s
        )
        # segment rows share the owner::index addressing used for steps
        seg_ids = [step_id(vid, j) for j in range(len(merged))]
        if any(sid not in seg_row for sid in seg_ids):
            return vid, None
        vectors = seg_matrix.rows[[seg_row[sid] for sid in seg_ids]]
        if cfg.retrieval_pool == "global":
            index = global_pool
        else:
            recipe_ids = paired.get(vid)
            if not recipe_ids:
                return vid, None
            index = pool_for(recipe_ids)
        try:
            curated = swap_video(
                video, splits[vid], vectors, index, catalog,
                min_similarity=cfg.min_similarity,
                max_merge_duration_s=cfg.merge_max_duration_s,
                max_merge_gap_s=cfg.merge_max_gap_s,
            )
        except SegmentAlignmentError:
            return vid, None
        return vid, curated

    results = _map_maybe_parallel(process, sorted(splits), workers)
    curated = [c for _, c in results if c is not None]
    failed = [vid for vid, c in results if c is None]
    if failed:
        log.warning("swap: %d videos failed: %s", len(failed), ", ".join(failed[:5]))

    out = _out_file(cfg, DATASET_FILE)
    emit_dataset(
        curated, out,
        config_echo=config_echo(cfg, stoplist),
        failed_video_ids=failed,
    )
    return out


# -- stats ------------------------------------------------------------------

def run_stats(cfg: PipelineConfig) -> Path:
    """Summarize a curated dataset next to its source corpus.

    Word deltas compare the whole ingested video corpus (the raw side)
    against the curated step text, mirroring how the corpora differ for a
    reader of the report.
    """
    dataset_path = _out_file(cfg, DATASET_FILE, must_exist=True)
    dataset = load_dataset(dataset_path)
    videos = _load_videos(cfg)
    recipes = _load_recipes(cfg) if cfg.recipes else None

    report = compute_stats(dataset, videos, recipes)
    deltas = compute_word_deltas(videos, dataset, cfg.stoplist())

    out = _out_file(cfg, REPORT_FILE)
    write_report(report, out)
    write_word_deltas(deltas, _out_file(cfg, WORD_DELTAS_FILE))
    write_sentence_counts(deltas, _out_file(cfg, SENTENCE_COUNTS_FILE))
    log.info(
        "stats: %d videos, %d -> %d segments",
        report.video_count, report.segment_count_before, report.segment_count_after,
    )
    return out


# -- validate ---------------------------------------------------------------

def run_validate(cfg: PipelineConfig) -> list[str]:
    """Re-check an emitted dataset against the output invariants.

    Returns human-readable violations, empty when the dataset is clean.
    Source videos and recipes deepen the checks when configured.
    """
    dataset = load_dataset(_out_file(cfg, DATASET_FILE, must_exist=True))
    violations: list[str] = []

    videos_by_id = {}
    if cfg.videos and Path(cfg.videos).exists():
        videos_by_id = {v.video_id: v for v in _load_videos(cfg)}
    recipes_by_id = {}
    if cfg.recipes and Path(cfg.recipes).exists():
        recipes_by_id = {r.recipe_id: r for r in _load_recipes(cfg)}

    for row in dataset:
        vid = row["video_id"]

        def bad(problem: str) -> None:
            violations.append(f"{vid}: {problem}")

        if row["split"] not in (SplitTag.TRAIN.value, SplitTag.VALIDATION.value):
            bad(f"unknown split {row['split']!r}")
        segs = row["segments"]
        for i, s in enumerate(segs):
            if s["similarity"] < cfg.min_similarity:
                bad(f"segment {i} similarity {s['similarity']} below {cfg.min_similarity}")
            if not s["start_s"] < s["end_s"]:
                bad(f"segment {i} has empty time span")
            recipe = recipes_by_id.get(s["recipe_id"])
            if recipe is not None:
                if not 0 <= s["step_index"] < len(recipe.steps):
                    bad(f"segment {i} step index {s['step_index']} out of range")
                elif s["text"] != recipe.steps[s["step_index"]]:
                    bad(f"segment {i} text differs from its recipe step")
            elif recipes_by_id:
                bad(f"segment {i} references unknown recipe {s['recipe_id']!r}")
        for i, (a, b) in enumerate(zip(segs, segs[1:])):
            if a["start_s"] > b["start_s"]:
                bad(f"segments {i} and {i + 1} out of order")
            if (a["recipe_id"], a["step_index"]) == (b["recipe_id"], b["step_index"]):
                bad(f"segments {i} and {i + 1} repeat the same step")
        source = videos_by_id.get(vid)
        if source is not None:
            if len(segs) > len(source.segments):
                bad(f"{len(segs)} curated segments exceed {len(source.segments)} source segments")
        elif videos_by_id:
            bad("not present in the source corpus")

    return violations


# -- pipeline ---------------------------------------------------------------

def run_pipeline(cfg: PipelineConfig, workers: int = 1) -> Path:
    """All stages in order; equivalent to running them one by one."""
    run_sieve_titles(cfg, workers)
    run_sieve_content(cfg)
    out = run_swap(cfg, workers)
    run_stats(cfg)
    return out
