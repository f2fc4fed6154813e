#!/usr/bin/env python3
"""Reference curation pipeline used to produce the golden fixture outputs.

Written from scratch against the documented behavior, on purpose without
importing anything from the package: the end-to-end test compares the
package's output bytes against this script's output bytes, so any logic
the two sides share would weaken that check. Everything here is naive
stdlib code: O(n^2) scoring, linear scans, one lemma lookup table that
covers the fixture vocabulary by hand.

Usage:
  python tools/golden_oracle.py --videos V.jsonl --recipes R.jsonl \
      --step-emb steps.sseb --seg-emb segs.sseb \
      --function-words fw.txt --generic-words gw.txt --out-dir golden/
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import re
import struct
from pathlib import Path

MAX_DURATION_S = 600.0
MIN_PER_CATEGORY = 5
MIN_TOKEN_IOU = 0.1
MIN_TOKEN_RECALL = 0.3
VAL_TOKEN_IOU = 0.2
MIN_SIMILARITY = 0.75
MERGE_MAX_DUR_S = 8.0
MERGE_MAX_GAP_S = 4.0

_WORD = re.compile(r"[^\W_]+(?:['\-][^\W_]+)*")

# Hand-written lemmas for every content word the fixture generator can
# emit. Identity entries are listed too so coverage is checkable: the
# generator refuses to emit a content token missing from this table.
LEMMA_TABLE = {
    # actions
    "add": "add", "added": "add", "adding": "add",
    "bake": "bake", "baked": "bake", "baking": "bake",
    "boil": "boil", "boiled": "boil", "boiling": "boil",
    "chop": "chop", "chopped": "chop", "chopping": "chop",
    "dice": "dice", "diced": "dice", "dicing": "dice",
    "drain": "drain", "drained": "drain", "draining": "drain",
    "drizzle": "drizzle", "drizzled": "drizzle", "drizzling": "drizzle",
    "fold": "fold", "folded": "fold", "folding": "fold",
    "garnish": "garnish", "garnished": "garnish", "garnishing": "garnish",
    "grill": "grill", "grilled": "grill", "grilling": "grill",
    "heat": "heat", "heated": "heat", "heating": "heat",
    "knead": "knead", "kneaded": "knead", "kneading": "knead",
    "melt": "melt", "melted": "melt", "melting": "melt",
    "mix": "mix", "mixed": "mix", "mixing": "mix",
    "pour": "pour", "poured": "pour", "pouring": "pour",
    "roast": "roast", "roasted": "roast", "roasting": "roast",
    "season": "season", "seasoned": "season", "seasoning": "season",
    "serve": "serve", "served": "serve", "serving": "serve",
    "simmer": "simmer", "simmered": "simmer", "simmering": "simmer",
    "slice": "slice", "sliced": "slice", "slicing": "slice",
    "sprinkle": "sprinkle", "sprinkled": "sprinkle", "sprinkling": "sprinkle",
    "stir": "stir", "stirred": "stir", "stirring": "stir",
    "toss": "toss", "tossed": "toss", "tossing": "toss",
    "whisk": "whisk", "whisked": "whisk", "whisking": "whisk",
    "subscribe": "subscribe", "subscribed": "subscribe",
    "smash": "smash", "smashed": "smash",
    "preheat": "preheat", "preheated": "preheat",
    "cover": "cover", "covered": "cover",
    "cool": "cool", "cooled": "cool", "cooling": "cool",
    "rest": "rest", "rests": "rest",
    "started": "start", "starting": "start", "start": "start",
    "starts": "start",
    "make": "make", "makes": "make", "made": "make", "making": "make",
    "watch": "watch", "watching": "watch", "watched": "watch",
    "thank": "thank", "thanks": "thank",
    "try": "try", "tried": "try",
    "use": "use", "used": "use",
    "smell": "smell", "smells": "smell",
    "eat": "eat", "get": "get", "grab": "grab", "stay": "stay",
    "see": "see", "know": "know", "forget": "forget", "hit": "hit",
    "welcome": "welcome", "love": "love", "chat": "chat",
    "tour": "tour", "haul": "haul",
    "roll": "roll", "rolls": "roll",
    "strip": "strip", "strips": "strip",
    # nouns, singular and plural
    "onion": "onion", "onions": "onion",
    "tomato": "tomato", "tomatoes": "tomato",
    "potato": "potato", "potatoes": "potato",
    "carrot": "carrot", "carrots": "carrot",
    "egg": "egg", "eggs": "egg",
    "mushroom": "mushroom", "mushrooms": "mushroom",
    "apple": "apple", "apples": "apple",
    "banana": "banana", "bananas": "banana",
    "bean": "bean", "beans": "bean",
    "cube": "cube", "cubes": "cube",
    "minute": "minute", "minutes": "minute",
    "bowl": "bowl", "bowls": "bowl",
    "pan": "pan", "pans": "pan",
    "clove": "clove", "cloves": "clove",
    "pinch": "pinch", "pinches": "pinch",
    "tablespoon": "tablespoon", "tablespoons": "tablespoon",
    "cup": "cup", "cups": "cup",
    "comment": "comment", "comments": "comment",
    "ingredient": "ingredient", "ingredients": "ingredient",
    "noodle": "noodle", "noodles": "noodle",
    "taco": "taco", "tacos": "taco",
    "channel": "channel", "video": "video", "videos": "video",
    "oven": "oven", "dough": "dough", "batter": "batter",
    "skillet": "skillet", "stove": "stove", "plate": "plate",
    "camera": "camera", "vlog": "vlog", "routine": "routine",
    "morning": "morning", "grandma": "grandma", "bell": "bell",
    "everyone": "everyone", "house": "house", "week": "week",
    "coffee": "coffee", "gym": "gym", "errands": "errand",
    "day": "day", "days": "day",
    "party": "party", "grocery": "grocery", "winter": "winter",
    "beginner": "beginner", "beginners": "beginner",
    "basic": "basic", "basics": "basic",
    "scratch": "scratch", "time": "time",
    "way": "way", "ways": "way",
    "grandma's": "grandma",
    # invariants
    "chicken": "chicken", "garlic": "garlic", "butter": "butter",
    "flour": "flour", "sugar": "sugar", "milk": "milk",
    "cheese": "cheese", "rice": "rice", "pasta": "pasta",
    "basil": "basil", "pepper": "pepper", "salt": "salt",
    "oil": "oil", "olive": "olive", "lemon": "lemon",
    "zucchini": "zucchini", "spinach": "spinach", "cream": "cream",
    "chocolate": "chocolate", "vanilla": "vanilla", "bread": "bread",
    "beef": "beef", "soup": "soup", "salad": "salad",
    "pie": "pie", "stew": "stew", "curry": "curry",
    "cake": "cake", "water": "water", "broth": "broth",
    "golden": "golden", "small": "small", "medium": "medium",
    "large": "large", "fresh": "fresh", "gently": "gently",
    "well": "well", "brown": "brown", "crispy": "crispy",
    "tender": "tender", "smooth": "smooth", "thick": "thick",
    "hot": "hot", "cold": "cold", "low": "low", "high": "high",
    "today": "today", "special": "special", "kitchen": "kitchen",
    "home": "home", "hello": "hello", "okay": "okay",
    "really": "really", "busy": "busy", "new": "new",
    "next": "next", "last": "last", "back": "back",
    "creamy": "creamy", "rustic": "rustic", "thin": "thin",
    "aside": "aside", "top": "top", "three": "three",
    "set": "set", "like": "like", "one": "one", "let": "let",
    "um": "um", "mm": "mm", "uh": "uh",
    "five": "five", "ten": "ten", "twenty": "twenty", "thirty": "thirty",
    "fifteen": "fifteen", "2": "2", "3": "3", "10": "10",
    "20": "20", "30": "30", "350": "350", "400": "400",
}


def tokenize(text):
    return _WORD.findall(text.replace("’", "'").casefold())


def lemma(token):
    return LEMMA_TABLE.get(token, token)


def read_words(path):
    out = set()
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.add(line.casefold())
    return frozenset(out)


def content_lemmas(text, stop):
    out = []
    for tok in tokenize(text):
        lem = lemma(tok)
        if tok not in stop and lem not in stop:
            out.append(lem)
    return out


def read_jsonl(path):
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f]


# -- embeddings -------------------------------------------------------------

def read_sseb(data_path, ids_path):
    blob = Path(data_path).read_bytes()
    magic, version, dim, count = struct.unpack_from("<4sIIQ", blob)
    assert magic == b"SSEB" and version == 1
    floats = struct.unpack_from(f"<{count * dim}f", blob, 20)
    ids = Path(ids_path).read_text(encoding="utf-8").splitlines()
    assert len(ids) == count
    rows = {}
    for i, id in enumerate(ids):
        vals = list(floats[i * dim:(i + 1) * dim])
        norm2 = 0.0
        for v in vals:
            norm2 += v * v
        assert norm2 > 0.0, f"zero row {i}"
        norm = math.sqrt(norm2)
        # quantize back to f32 exactly like a float32 store would
        rows[id] = [f32(v / norm) for v in vals]
    return rows


def f32(x):
    return struct.unpack("<f", struct.pack("<f", x))[0]


def top1(pool, qvec):
    """Best (id, cosine) over pool, ids ascending on ties.

    The accumulation order (query normalized first, then one product per
    dimension left to right in double precision) is part of the output
    contract: it makes similarities reproducible to the last bit.
    """
    norm2 = 0.0
    for v in qvec:
        norm2 += v * v
    norm = math.sqrt(norm2)
    q = [v / norm for v in qvec]
    best_id, best_sim = None, None
    for id in sorted(pool):
        row = pool[id]
        s = 0.0
        for d in range(len(q)):
            s += row[d] * q[d]
        if best_sim is None or s > best_sim:
            best_id, best_sim = id, s
    return best_id, best_sim


# -- pipeline stages --------------------------------------------------------

def source_filter(videos):
    short = [v for v in videos if v["duration_s"] <= MAX_DURATION_S]
    per_cat = {}
    for v in short:
        per_cat[v["category"]] = per_cat.get(v["category"], 0) + 1
    return [v for v in short if per_cat[v["category"]] >= MIN_PER_CATEGORY]


def title_lemmas(record, stop):
    return set(content_lemmas(record["title"], stop))


def score_pairs(videos, recipes, stop):
    """Title-overlap pairing plus token overlap scores, sorted rows."""
    rows = []
    vid_tokens = {
        v["video_id"]: set(
            content_lemmas(" ".join(s["text"] for s in v["segments"]), stop)
        )
        for v in videos
    }
    rec_tokens = {
        r["recipe_id"]: set(content_lemmas(" ".join(r["steps"]), stop))
        for r in recipes
    }
    for v in sorted(videos, key=lambda v: v["video_id"]):
        vt = title_lemmas(v, stop)
        for r in sorted(recipes, key=lambda r: r["recipe_id"]):
            if not vt & title_lemmas(r, stop):
                continue
            a = vid_tokens[v["video_id"]]
            b = rec_tokens[r["recipe_id"]]
            inter = len(a & b)
            union = len(a | b)
            rows.append({
                "video_id": v["video_id"],
                "recipe_id": r["recipe_id"],
                "token_iou": inter / union if union else 0.0,
                "token_recall": inter / len(b) if b else 0.0,
            })
    return rows


def content_sieve(pairs):
    return [
        p for p in pairs
        if p["token_iou"] >= MIN_TOKEN_IOU and p["token_recall"] >= MIN_TOKEN_RECALL
    ]


def split_videos(kept):
    best = {}
    for p in kept:
        vid = p["video_id"]
        best[vid] = max(best.get(vid, 0.0), p["token_iou"])
    return {
        vid: "validation" if iou >= VAL_TOKEN_IOU else "train"
        for vid, iou in best.items()
    }


def merge(segments):
    items = [dict(s) for s in segments]
    out = []
    for seg in items:
        if out:
            cur = out[-1]
            gap = max(0.0, seg["start_s"] - cur["end_s"])
            if (
                cur["end_s"] - cur["start_s"] < MERGE_MAX_DUR_S
                and seg["end_s"] - seg["start_s"] < MERGE_MAX_DUR_S
                and gap < MERGE_MAX_GAP_S
            ):
                cur["end_s"] = max(cur["end_s"], seg["end_s"])
                cur["text"] = cur["text"] + " " + seg["text"]
                continue
        out.append(seg)
    return out


def swap(video, split, seg_rows, step_pool, steps_text):
    merged = merge(video["segments"])
    picked = []
    for j, seg in enumerate(merged):
        key = f"{video['video_id']}::{j}"
        qvec = seg_rows[key]
        sid, sim = top1(step_pool, qvec)
        if sid is None or sim < MIN_SIMILARITY:
            continue
        rid, _, k = sid.rpartition("::")
        picked.append({
            "recipe_id": rid,
            "step_index": int(k),
            "text": steps_text[sid],
            "start_s": seg["start_s"],
            "end_s": seg["end_s"],
            "similarity": sim,
        })
    collapsed = []
    for p in picked:
        if collapsed and (collapsed[-1]["recipe_id"], collapsed[-1]["step_index"]) == (
            p["recipe_id"], p["step_index"]
        ):
            last = collapsed[-1]
            last["start_s"] = min(last["start_s"], p["start_s"])
            last["end_s"] = max(last["end_s"], p["end_s"])
            last["similarity"] = max(last["similarity"], p["similarity"])
        else:
            collapsed.append(dict(p))
    return {
        "video_id": video["video_id"],
        "title": video["title"],
        "split": split,
        "segments": collapsed,
    }


def sha_words(words):
    return hashlib.sha256("\n".join(sorted(words)).encode("utf-8")).hexdigest()


def run(videos_path, recipes_path, step_emb, seg_emb, fw_path, gw_path, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fw = read_words(fw_path)
    gw = read_words(gw_path)
    stop = fw | gw

    videos = read_jsonl(videos_path)
    recipes = read_jsonl(recipes_path)
    filtered = source_filter(videos)

    pairs = score_pairs(filtered, recipes, stop)
    write_jsonl(out_dir / "pairs.jsonl", pairs)

    kept = content_sieve(pairs)
    splits = split_videos(kept)
    write_jsonl(
        out_dir / "split.jsonl",
        [{"video_id": vid, "split": splits[vid]} for vid in sorted(splits)],
    )

    steps_text = {}
    for r in recipes:
        for k, text in enumerate(r["steps"]):
            steps_text[f"{r['recipe_id']}::{k}"] = text

    step_rows = read_sseb(step_emb, Path(step_emb).with_suffix(".ids"))
    seg_rows = read_sseb(seg_emb, Path(seg_emb).with_suffix(".ids"))

    kept_recipes = {p["recipe_id"] for p in kept}
    pool = {
        sid: row for sid, row in step_rows.items()
        if sid.rpartition("::")[0] in kept_recipes
    }

    by_id = {v["video_id"]: v for v in videos}
    curated, failed = [], []
    for vid in sorted(splits):
        video = by_id.get(vid)
        ok = video is not None
        if ok:
            needed = [f"{vid}::{j}" for j in range(len(merge(video["segments"])))]
            ok = all(k in seg_rows for k in needed)
        if not ok:
            failed.append(vid)
            continue
        curated.append(swap(video, splits[vid], seg_rows, pool, steps_text))

    curated.sort(key=lambda c: c["video_id"])
    with (out_dir / "dataset.jsonl").open("w", encoding="utf-8") as f:
        for c in curated:
            f.write(json.dumps(c, ensure_ascii=False) + "\n")

    manifest = {
        "videos": len(curated),
        "segments_before": sum(len(by_id[c["video_id"]]["segments"]) for c in curated),
        "segments_after": sum(len(c["segments"]) for c in curated),
        "empty_video_ids": sorted(c["video_id"] for c in curated if not c["segments"]),
        "failed_video_ids": sorted(failed),
        "config": {
            "max_duration_s": MAX_DURATION_S,
            "min_per_category": MIN_PER_CATEGORY,
            "min_token_iou": MIN_TOKEN_IOU,
            "min_token_recall": MIN_TOKEN_RECALL,
            "val_token_iou": VAL_TOKEN_IOU,
            "min_similarity": MIN_SIMILARITY,
            "merge_max_duration_s": MERGE_MAX_DUR_S,
            "merge_max_gap_s": MERGE_MAX_GAP_S,
            "retrieval_pool": "global",
            "strict_ingest": True,
            "stoplist_sha256": {
                "function_words": sha_words(fw),
                "generic_recipe_words": sha_words(gw),
            },
        },
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    return manifest


def write_jsonl(path, objs):
    with Path(path).open("w", encoding="utf-8") as f:
        for obj in objs:
            f.write(json.dumps(obj, ensure_ascii=False) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--videos", required=True)
    ap.add_argument("--recipes", required=True)
    ap.add_argument("--step-emb", required=True)
    ap.add_argument("--seg-emb", required=True)
    ap.add_argument("--function-words", required=True)
    ap.add_argument("--generic-words", required=True)
    ap.add_argument("--out-dir", required=True)
    args = ap.parse_args()
    manifest = run(
        args.videos, args.recipes, args.step_emb, args.seg_emb,
        args.function_words, args.generic_words, args.out_dir,
    )
    print(json.dumps({k: manifest[k] for k in ("videos", "segments_before", "segments_after")}))


if __name__ == "__main__":
    main()
