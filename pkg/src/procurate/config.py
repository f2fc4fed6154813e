"""Run configuration: paths, thresholds, validation, config-file loading."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .textnorm import Stoplist


class ConfigError(ValueError):
    """Bad configuration; callers map this to exit code 2."""


RETRIEVAL_POOLS = ("global", "paired")

_PATH_FIELDS = (
    "videos", "recipes", "step_emb", "seg_emb", "out_dir",
    "function_words", "generic_words",
)
_UNIT_FIELDS = ("min_token_iou", "min_token_recall", "val_token_iou", "min_similarity")
_POSITIVE_FIELDS = ("max_duration_s", "merge_max_duration_s", "merge_max_gap_s")


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a run needs. Paths may stay unset; each stage checks for
    the ones it actually reads. The numeric defaults are the published
    operating point."""

    videos: Path | None = None
    recipes: Path | None = None
    step_emb: Path | None = None
    seg_emb: Path | None = None
    out_dir: Path = Path(".")
    function_words: Path | None = None
    generic_words: Path | None = None
    max_duration_s: float = 600.0
    min_per_category: int = 5
    min_token_iou: float = 0.1
    min_token_recall: float = 0.3
    val_token_iou: float = 0.2
    min_similarity: float = 0.75
    merge_max_duration_s: float = 8.0
    merge_max_gap_s: float = 4.0
    retrieval_pool: str = "global"
    strict_ingest: bool = True

    def validated(self) -> "PipelineConfig":
        for name in _UNIT_FIELDS:
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {v}")
        for name in _POSITIVE_FIELDS:
            v = getattr(self, name)
            if not v > 0.0:
                raise ConfigError(f"{name} must be positive, got {v}")
        if self.val_token_iou < self.min_token_iou:
            raise ConfigError(
                f"val_token_iou ({self.val_token_iou}) must be at least "
                f"min_token_iou ({self.min_token_iou})"
            )
        if self.min_per_category < 0:
            raise ConfigError(
                f"min_per_category must be nonnegative, got {self.min_per_category}"
            )
        if self.retrieval_pool not in RETRIEVAL_POOLS:
            raise ConfigError(
                f"retrieval_pool must be one of {RETRIEVAL_POOLS}, "
                f"got {self.retrieval_pool!r}"
            )
        return self

    def stoplist(self) -> Stoplist:
        if self.function_words or self.generic_words:
            if not (self.function_words and self.generic_words):
                raise ConfigError(
                    "function_words and generic_words must be set together"
                )
            return Stoplist.from_files(self.function_words, self.generic_words)
        return Stoplist.default()

    def require(self, *names: str) -> None:
        """Check that the named input paths are set and exist."""
        for name in names:
            path = getattr(self, name)
            if path is None:
                raise ConfigError(f"required input not configured: {name}")
            if not Path(path).exists():
                raise ConfigError(f"{name} file not found: {path}")


def _coerce(name: str, value: Any) -> Any:
    if name in _PATH_FIELDS:
        if value is None:
            return None
        if not isinstance(value, (str, Path)):
            raise ConfigError(f"{name} must be a path string")
        return Path(value)
    if name == "min_per_category":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name} must be an integer, got {value!r}")
        return value
    if name == "strict_ingest":
        if not isinstance(value, bool):
            raise ConfigError(f"{name} must be true or false, got {value!r}")
        return value
    if name == "retrieval_pool":
        if not isinstance(value, str):
            raise ConfigError(f"{name} must be a string, got {value!r}")
        return value
    # everything else is a real-valued threshold
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    return float(value)


def load_config(
    config_path: Path | str | None,
    overrides: Mapping[str, Any] | None = None,
) -> PipelineConfig:
    """Build the effective config: file values first, then overrides.

    The file is a flat JSON object over PipelineConfig field names;
    unknown keys are rejected so typos fail loudly. Override entries set
    to None are treated as absent, which lets CLI flags default to None.
    """
    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    values: dict[str, Any] = {}

    if config_path is not None:
        path = Path(config_path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: not valid JSON ({e.msg})") from e
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        for key, value in raw.items():
            if key not in known:
                raise ConfigError(f"{path}: unknown config key {key!r}")
            values[key] = _coerce(key, value)

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in known:
            raise ConfigError(f"unknown config override {key!r}")
        values[key] = _coerce(key, value)

    return PipelineConfig(**values).validated()


def _words_digest(words) -> str:
    joined = "\n".join(sorted(words)).encode("utf-8")
    return hashlib.sha256(joined).hexdigest()


def config_echo(cfg: PipelineConfig, stoplist: Stoplist) -> dict:
    """The provenance block embedded in manifest.json.

    Deliberately free of filesystem paths and worker counts so the same
    logical run produces identical bytes anywhere; the stoplists are
    pinned by content digest instead of by path.
    """
    return {
        "max_duration_s": cfg.max_duration_s,
        "min_per_category": cfg.min_per_category,
        "min_token_iou": cfg.min_token_iou,
        "min_token_recall": cfg.min_token_recall,
        "val_token_iou": cfg.val_token_iou,
        "min_similarity": cfg.min_similarity,
        "merge_max_duration_s": cfg.merge_max_duration_s,
        "merge_max_gap_s": cfg.merge_max_gap_s,
        "retrieval_pool": cfg.retrieval_pool,
        "strict_ingest": cfg.strict_ingest,
        "stoplist_sha256": {
            "function_words": _words_digest(stoplist.function_words),
            "generic_recipe_words": _words_digest(stoplist.generic_recipe_words),
        },
    }
