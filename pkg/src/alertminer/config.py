"""Run configuration: YAML file, ``ALERTMINER_*`` environment overrides, CLI flags.

Example file::

    detectors:
      max_branches: 12
    refactor_keywords: [refactor, cleanup]
    min_window_commits: 5
    window_days: 90        # optional time-boxed windows
    ccp_low: 0.09
    ccp_high: 0.39
    seed: 0

Nested keys are addressed in the environment with a double underscore, e.g.
``ALERTMINER_DETECTORS__MAX_BRANCHES=15`` or ``ALERTMINER_SEED=3``.
"""

from __future__ import annotations

import functools
import os
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

import yaml

from alertminer.detectors import DetectorConfig

ENV_PREFIX = "ALERTMINER_"

DEFAULT_REFACTOR_KEYWORDS = (
    "refactor", "refactoring", "refactored", "cleanup", "clean up",
    "restructure", "simplify", "extract",
)
DEFAULT_CORRECTIVE_KEYWORDS = (
    "fix", "fixes", "fixed", "bug", "bugs", "defect", "error", "fail",
    "failure", "fault", "patch", "repair",
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    detectors: DetectorConfig = field(default_factory=DetectorConfig)
    refactor_keywords: tuple[str, ...] = DEFAULT_REFACTOR_KEYWORDS
    corrective_keywords: tuple[str, ...] = DEFAULT_CORRECTIVE_KEYWORDS
    min_window_commits: int = 5
    window_days: float | None = None
    ccp_low: float = 0.09
    ccp_high: float = 0.39
    seed: int = 0
    output: str | None = None
    jobs: int = 1
    include_tests: bool = False

    def __post_init__(self) -> None:
        if self.min_window_commits < 1:
            raise ConfigError("min_window_commits must be >= 1")
        if self.window_days is not None and self.window_days <= 0:
            raise ConfigError("window_days must be positive")
        if not 0.0 <= self.ccp_low <= self.ccp_high <= 1.0:
            raise ConfigError("ccp thresholds must satisfy 0 <= ccp_low <= ccp_high <= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        for name in ("refactor_keywords", "corrective_keywords"):
            words = getattr(self, name)
            if not words or not all(isinstance(w, str) and w.strip() for w in words):
                raise ConfigError(f"{name} must be a non-empty list of words")


def _coerce(name: str, value: Any, current: Any) -> Any:
    if name in ("refactor_keywords", "corrective_keywords"):
        if isinstance(value, str):
            value = [w.strip() for w in value.split(",")]
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{name} must be a list")
        return tuple(str(v) for v in value)
    if name == "window_days":
        return None if value is None else float(value)
    if name == "output":
        return None if value is None else str(value)
    if isinstance(current, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{name} must be a boolean")
        return value
    if isinstance(current, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name} must be an integer")
        return value
    if isinstance(current, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name} must be a number")
        return float(value)
    return value


def config_from_mapping(data: Mapping[str, Any], base: RunConfig | None = None) -> RunConfig:
    """Build a config from a (possibly partial) mapping; unknown keys are rejected."""
    base = base or RunConfig()
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    changes: dict[str, Any] = {}
    for key, value in data.items():
        if key == "detectors":
            if not isinstance(value, Mapping):
                raise ConfigError("detectors must be a mapping")
            detector_keys = {f.name for f in fields(DetectorConfig)}
            bad = set(value) - detector_keys
            if bad:
                raise ConfigError(f"unknown detector keys: {', '.join(sorted(bad))}")
            try:
                changes["detectors"] = replace(base.detectors, **dict(value))
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        else:
            changes[key] = _coerce(key, value, getattr(base, key))
    try:
        return replace(base, **changes)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def env_overrides(environ: Mapping[str, str]) -> dict[str, Any]:
    tree: dict[str, Any] = {}
    for name, raw in sorted(environ.items()):
        if not name.startswith(ENV_PREFIX):
            continue
        parts = name[len(ENV_PREFIX):].lower().split("__")
        value = yaml.safe_load(raw) if raw.strip() else None
        node = tree
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"conflicting environment override {name}")
        node[parts[-1]] = value
    return tree


def load_config(path: str | Path | None = None, *, environ: Mapping[str, str] | None = None,
                **overrides: Any) -> RunConfig:
    """Defaults, then the YAML file, then the environment, then ``overrides``."""
    cfg = RunConfig()
    if path is not None:
        try:
            data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML in {path}: {exc}") from None
        if not isinstance(data, Mapping):
            raise ConfigError(f"{path}: top level must be a mapping")
        cfg = config_from_mapping(data, cfg)
    env = os.environ if environ is None else environ
    cfg = config_from_mapping(env_overrides(env), cfg)
    given = {k: v for k, v in overrides.items() if v is not None}
    return config_from_mapping(given, cfg) if given else cfg


@functools.lru_cache(maxsize=64)
def keyword_pattern(words: tuple[str, ...]) -> re.Pattern[str]:
    """Case-insensitive whole-word matcher; multi-word entries match across any whitespace.

    ``\\b`` treats ``_`` as a word character, so keywords inside identifiers
    (``prefix``, ``fix_path``) do not match.
    """
    alternatives = sorted((r"\s+".join(map(re.escape, w.split())) for w in words), key=len, reverse=True)
    return re.compile(r"\b(?:" + "|".join(alternatives) + r")\b", re.IGNORECASE)
