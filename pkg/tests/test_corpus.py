import json
import tracemalloc

import pytest

from procurate.corpus import (
    AsrSegment,
    CorpusError,
    DuplicateIdError,
    ParseStats,
    Recipe,
    VideoRecord,
    filter_source,
    parse_recipes,
    parse_videos,
    recipe_to_obj,
    video_to_obj,
)


def write_jsonl(path, objs):
    with path.open("w", encoding="utf-8") as f:
        for obj in objs:
            f.write(json.dumps(obj) + "\n")


def video_obj(video_id="v1", title="Bean Salad", duration=120.0, category="salads", segments=None):
    if segments is None:
        segments = [{"text": "add the beans", "start_s": 0.0, "end_s": 4.0}]
    return {
        "video_id": video_id,
        "title": title,
        "duration_s": duration,
        "category": category,
        "segments": segments,
    }


def recipe_obj(recipe_id="r1", title="Bean Salad", steps=("Add beans.", "Toss well.")):
    return {"recipe_id": recipe_id, "title": title, "steps": list(steps)}


# -- parse_videos -----------------------------------------------------------

def test_parse_videos_basic(tmp_path):
    p = tmp_path / "videos.jsonl"
    write_jsonl(p, [video_obj()])
    videos = list(parse_videos(p))
    assert len(videos) == 1
    v = videos[0]
    assert v.video_id == "v1"
    assert v.segments == (AsrSegment("add the beans", 0.0, 4.0),)


def test_parse_videos_sorts_segments(tmp_path):
    p = tmp_path / "videos.jsonl"
    segs = [
        {"text": "second", "start_s": 10.0, "end_s": 12.0},
        {"text": "first", "start_s": 1.0, "end_s": 3.0},
    ]
    write_jsonl(p, [video_obj(segments=segs)])
    (v,) = parse_videos(p)
    assert [s.text for s in v.segments] == ["first", "second"]


def test_parse_videos_malformed_line_strict_names_line(tmp_path):
    p = tmp_path / "videos.jsonl"
    p.write_text(json.dumps(video_obj()) + "\n{not json\n", encoding="utf-8")
    with pytest.raises(CorpusError, match="videos.jsonl:2"):
        list(parse_videos(p))


def test_parse_videos_malformed_line_lenient_counts(tmp_path):
    p = tmp_path / "videos.jsonl"
    p.write_text(
        json.dumps(video_obj("v1")) + "\n{not json\n" + json.dumps(video_obj("v2")) + "\n",
        encoding="utf-8",
    )
    stats = ParseStats()
    videos = list(parse_videos(p, strict=False, stats=stats))
    assert [v.video_id for v in videos] == ["v1", "v2"]
    assert stats.rejected_lines == 1
    assert stats.records == stats.lines - stats.rejected_lines


def test_parse_videos_bad_segment_lenient_drops_and_counts(tmp_path):
    p = tmp_path / "videos.jsonl"
    segs = [
        {"text": "ok", "start_s": 0.0, "end_s": 2.0},
        {"text": "reversed", "start_s": 5.0, "end_s": 5.0},
    ]
    write_jsonl(p, [video_obj(segments=segs)])
    stats = ParseStats()
    (v,) = parse_videos(p, strict=False, stats=stats)
    assert len(v.segments) == 1
    assert stats.dropped_segments == 1


def test_parse_videos_bad_segment_strict_aborts(tmp_path):
    p = tmp_path / "videos.jsonl"
    segs = [{"text": "reversed", "start_s": 5.0, "end_s": 5.0}]
    write_jsonl(p, [video_obj(segments=segs)])
    with pytest.raises(CorpusError, match="segment"):
        list(parse_videos(p))


def test_parse_videos_segment_past_duration_slack(tmp_path):
    p = tmp_path / "videos.jsonl"
    ok = {"text": "inside slack", "start_s": 0.0, "end_s": 120.9}
    bad = {"text": "outside", "start_s": 0.0, "end_s": 121.5}
    write_jsonl(p, [video_obj(segments=[ok, bad])])
    stats = ParseStats()
    (v,) = parse_videos(p, strict=False, stats=stats)
    assert [s.text for s in v.segments] == ["inside slack"]
    assert stats.dropped_segments == 1


def test_parse_videos_duplicate_id_aborts_both_modes(tmp_path):
    p = tmp_path / "videos.jsonl"
    write_jsonl(p, [video_obj("v1"), video_obj("v1")])
    with pytest.raises(DuplicateIdError):
        list(parse_videos(p))
    with pytest.raises(DuplicateIdError):
        list(parse_videos(p, strict=False))


def test_parse_videos_missing_category_strict_rejects(tmp_path):
    p = tmp_path / "videos.jsonl"
    obj = video_obj()
    del obj["category"]
    write_jsonl(p, [obj])
    with pytest.raises(CorpusError, match="category"):
        list(parse_videos(p))
    stats = ParseStats()
    assert list(parse_videos(p, strict=False, stats=stats)) == []
    assert stats.rejected_lines == 1


# -- parse_recipes ----------------------------------------------------------

def test_parse_recipes_basic_roundtrip(tmp_path):
    p = tmp_path / "recipes.jsonl"
    write_jsonl(p, [recipe_obj()])
    (r,) = parse_recipes(p)
    assert r == Recipe("r1", "Bean Salad", ("Add beans.", "Toss well."))
    # serialize and parse again
    p2 = tmp_path / "again.jsonl"
    write_jsonl(p2, [recipe_to_obj(r)])
    assert list(parse_recipes(p2)) == [r]


def test_parse_recipes_drops_empty_steps(tmp_path):
    p = tmp_path / "recipes.jsonl"
    write_jsonl(p, [recipe_obj(steps=["", "Add salt."])])
    (r,) = parse_recipes(p)
    assert r.steps == ("Add salt.",)


def test_parse_recipes_all_empty_steps_rejected(tmp_path):
    p = tmp_path / "recipes.jsonl"
    write_jsonl(p, [recipe_obj("r1", steps=["", "  "]), recipe_obj("r2")])
    stats = ParseStats()
    recipes = list(parse_recipes(p, strict=False, stats=stats))
    assert [r.recipe_id for r in recipes] == ["r2"]
    assert stats.rejected_lines == 1
    with pytest.raises(CorpusError):
        list(parse_recipes(p))


def test_parse_recipes_is_lazy(tmp_path):
    # a malformed line at the end must not surface before it is reached
    p = tmp_path / "recipes.jsonl"
    p.write_text(json.dumps(recipe_obj()) + "\nbroken\n", encoding="utf-8")
    gen = parse_recipes(p)
    assert next(gen).recipe_id == "r1"
    with pytest.raises(CorpusError):
        next(gen)


def test_parse_recipes_streaming_memory(tmp_path):
    # peak memory while streaming stays far below the file size
    p = tmp_path / "recipes.jsonl"
    step = "Dice the onions and cook them down with a little oil. " * 20
    with p.open("w", encoding="utf-8") as f:
        for i in range(20000):
            f.write(json.dumps(recipe_obj(f"r{i}", steps=[step])) + "\n")
    file_size = p.stat().st_size
    tracemalloc.start()
    count = 0
    for _ in parse_recipes(p):
        count += 1
    _, peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()
    assert count == 20000
    # materializing the list costs ~1.3x the file size; streaming stays
    # bounded by the id set plus one record in flight
    assert peak < file_size / 4


def test_video_roundtrip(tmp_path):
    p = tmp_path / "videos.jsonl"
    write_jsonl(p, [video_obj()])
    (v,) = parse_videos(p)
    p2 = tmp_path / "again.jsonl"
    write_jsonl(p2, [video_to_obj(v)])
    assert list(parse_videos(p2)) == [v]


# -- filter_source ----------------------------------------------------------

def make_video(video_id, duration, category):
    return VideoRecord(video_id, f"title {video_id}", duration, category, ())


def test_filter_source_duration_boundary_inclusive():
    videos = [make_video(f"v{i}", d, "c") for i, d in enumerate([600.0, 600.1, 599.9, 100.0, 200.0, 300.0])]
    kept = filter_source(videos)
    assert "v1" not in {v.video_id for v in kept}
    assert {v.video_id for v in kept} == {"v0", "v2", "v3", "v4", "v5"}


def test_filter_source_category_boundary_inclusive():
    five = [make_video(f"a{i}", 100, "keep") for i in range(5)]
    four = [make_video(f"b{i}", 100, "drop") for i in range(4)]
    kept = filter_source(five + four)
    assert {v.category for v in kept} == {"keep"}


def test_filter_source_duration_cut_can_kill_category():
    # 5 videos in a category, one overlong: count drops to 4, all go
    vids = [make_video(f"v{i}", 100, "c") for i in range(4)]
    vids.append(make_video("v4", 601, "c"))
    assert filter_source(vids) == []


def test_filter_source_idempotent_and_order_preserving():
    vids = [make_video(f"v{i}", 100 + i, "c") for i in range(7)]
    once = filter_source(vids)
    assert filter_source(once) == once
    assert [v.video_id for v in once] == [f"v{i}" for i in range(7)]


def test_filter_source_empty():
    assert filter_source([]) == []
