"""JSON Lines event store. Each line is one removal event tagged with a schema version."""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO, Iterable

from alertminer.ccp import CCPWindow
from alertminer.detectors import AlertKind
from alertminer.vcs import CommitRecord, RemovalEvent, SnapshotAnalysis

SCHEMA = "alertminer.removal-event/1"


class StoreError(ValueError):
    pass


def event_to_dict(event: RemovalEvent) -> dict:
    windows = None
    if event.windows is not None:
        windows = {"before": event.windows[0].to_dict(), "after": event.windows[1].to_dict()}
    return {
        "schema": SCHEMA,
        "id": event.id,
        "alert_kind": event.alert_kind.value,
        "path": event.path,
        "commit": event.commit.to_dict(),
        "removed_count": event.removed_count,
        "before": event.before.to_dict(),
        "after": event.after.to_dict(),
        "mccabe_max_diff": event.mccabe_max_diff,
        "mccabe_sum_diff": event.mccabe_sum_diff,
        "loc_diff": event.loc_diff,
        "added_lines": event.added_lines,
        "deleted_lines": event.deleted_lines,
        "new_function_added": event.new_function_added,
        "message_mentions_refactor": event.message_mentions_refactor,
        "windows": windows,
    }


def event_from_dict(data: dict) -> RemovalEvent:
    if data.get("schema") != SCHEMA:
        raise StoreError(f"unsupported schema {data.get('schema')!r}, expected {SCHEMA!r}")
    windows = data.get("windows")
    return RemovalEvent(
        alert_kind=AlertKind(data["alert_kind"]),
        path=data["path"],
        commit=CommitRecord.from_dict(data["commit"]),
        removed_count=int(data["removed_count"]),
        before=SnapshotAnalysis.from_dict(data["before"]),
        after=SnapshotAnalysis.from_dict(data["after"]),
        mccabe_max_diff=int(data["mccabe_max_diff"]),
        mccabe_sum_diff=int(data["mccabe_sum_diff"]),
        loc_diff=int(data["loc_diff"]),
        added_lines=int(data["added_lines"]),
        deleted_lines=int(data["deleted_lines"]),
        new_function_added=bool(data["new_function_added"]),
        message_mentions_refactor=bool(data["message_mentions_refactor"]),
        windows=None if windows is None else (CCPWindow.from_dict(windows["before"]),
                                              CCPWindow.from_dict(windows["after"])),
    )


def dumps_event(event: RemovalEvent) -> str:
    return json.dumps(event_to_dict(event), sort_keys=True, ensure_ascii=False)


def write_events(events: Iterable[RemovalEvent], target: str | Path | IO[str]) -> int:
    """Write one JSON object per line; returns the number written."""
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="\n") as handle:
            return write_events(events, handle)
    n = 0
    for event in events:
        target.write(dumps_event(event) + "\n")
        n += 1
    return n


def read_events(path: str | Path) -> list[RemovalEvent]:
    events = []
    try:
        handle = open(path, encoding="utf-8")
    except OSError as exc:
        raise StoreError(f"cannot read {path}: {exc}") from None
    with handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                events.append(event_from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                detail = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
                raise StoreError(f"{path}:{lineno}: invalid event: {detail}") from None
    return events
