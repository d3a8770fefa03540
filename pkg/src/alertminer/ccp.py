"""Corrective Commit Probability over commit windows, with the MLE hit-rate correction."""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import timedelta
from typing import Sequence

from alertminer.config import DEFAULT_CORRECTIVE_KEYWORDS, RunConfig, keyword_pattern
from alertminer.vcs import CommitRecord, RemovalEvent, file_history


class UndefinedEstimatorError(ValueError):
    """Raised when recall does not exceed the false-positive rate."""


@dataclass(frozen=True)
class CCPWindow:
    commits: tuple[str, ...]  # commit ids, oldest first
    corrective_count: int
    total: int
    ccp: float

    def __post_init__(self) -> None:
        if self.total < 1 or self.total != len(self.commits):
            raise ValueError("a window holds at least one commit and total must match")
        if not 0 <= self.corrective_count <= self.total:
            raise ValueError("corrective_count out of range")

    def to_dict(self) -> dict:
        return {"commits": list(self.commits), "corrective_count": self.corrective_count,
                "total": self.total, "ccp": self.ccp}

    @classmethod
    def from_dict(cls, data: dict) -> CCPWindow:
        return cls(tuple(data["commits"]), int(data["corrective_count"]), int(data["total"]),
                   float(data["ccp"]))


@dataclass(frozen=True)
class ClassifierQuality:
    recall: float
    false_positive_rate: float

    def __post_init__(self) -> None:
        if not 0.0 < self.recall <= 1.0:
            raise ValueError("recall must lie in (0, 1]")
        if not 0.0 <= self.false_positive_rate < 1.0:
            raise ValueError("false_positive_rate must lie in [0, 1)")


def classify_corrective(message: str, keywords: Sequence[str] = DEFAULT_CORRECTIVE_KEYWORDS) -> bool:
    return keyword_pattern(tuple(keywords)).search(message) is not None


def ccp_of(commits: Sequence[CommitRecord], keywords: Sequence[str] = DEFAULT_CORRECTIVE_KEYWORDS) -> CCPWindow:
    if not commits:
        raise ValueError("cannot compute CCP of an empty window")
    hits = sum(classify_corrective(c.message, keywords) for c in commits)
    return CCPWindow(tuple(c.id for c in commits), hits, len(commits), hits / len(commits))


def mle_positive_rate(hit_rate: float, quality: ClassifierQuality) -> float:
    """Invert hit_rate = p * recall + (1 - p) * fpr for p, clamped into [0, 1]."""
    recall, fpr = quality.recall, quality.false_positive_rate
    if recall <= fpr:
        raise UndefinedEstimatorError(f"recall {recall} must exceed false-positive rate {fpr}")
    return min(1.0, max(0.0, (hit_rate - fpr) / (recall - fpr)))


def windows_for_event(event: RemovalEvent, history: Sequence[CommitRecord], min_commits: int = 5, *,
                      keywords: Sequence[str] = DEFAULT_CORRECTIVE_KEYWORDS,
                      window: timedelta | None = None) -> tuple[CCPWindow, CCPWindow] | None:
    """Before/after windows around the event commit, or None when either side is too short.

    By default every earlier and every later commit of ``history`` is used.
    With ``window`` only commits within that duration of the event commit count.
    """
    index = next((k for k, c in enumerate(history) if c.id == event.commit.id), None)
    if index is None:
        return None
    before, after = list(history[:index]), list(history[index + 1:])
    if window is not None:
        t = event.commit.timestamp
        before = [c for c in before if t - window <= c.timestamp]
        after = [c for c in after if c.timestamp <= t + window]
    if len(before) < min_commits or len(after) < min_commits:
        return None
    return ccp_of(before, keywords), ccp_of(after, keywords)


def attach_windows(events: Sequence[RemovalEvent], commits: Sequence[CommitRecord],
                   cfg: RunConfig | None = None) -> list[RemovalEvent]:
    """Return copies of ``events`` carrying their CCP windows where available."""
    cfg = cfg or RunConfig()
    span = None if cfg.window_days is None else timedelta(days=cfg.window_days)
    histories: dict[tuple[str, str], list[CommitRecord]] = {}
    out = []
    for event in events:
        key = (event.path, event.commit.id)
        if key not in histories:
            histories[key] = file_history(commits, event.path, anchor=event.commit.id)
        windows = windows_for_event(event, histories[key], cfg.min_window_commits,
                                    keywords=cfg.corrective_keywords, window=span)
        out.append(replace(event, windows=windows))
    return out
