"""Git history access and alert-removal mining.

The repository is read through git's command-line plumbing: one
``git log`` call yields the first-parent timeline with raw and numstat
diffs, and blob contents come from a single ``git cat-file --batch``
process. Snapshot analysis is cached per (blob, path) and may run in a
process pool; events are always assembled serially in commit order.
"""

from __future__ import annotations

import hashlib
import logging
import re
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path, PurePosixPath
from typing import TYPE_CHECKING, Iterable, Sequence

from alertminer.config import RunConfig, keyword_pattern
from alertminer.detectors import AlertInstance, AlertKind, DetectorConfig, count_by_kind, detect_all
from alertminer.metrics import FileMetrics, file_metrics
from alertminer.source import parse_source

if TYPE_CHECKING:
    from alertminer.ccp import CCPWindow

log = logging.getLogger(__name__)

NULL_SHA = "0" * 40
_SKIPPED_MODES = frozenset({"120000", "160000"})  # symlinks, submodules
_LOG_FORMAT = "--format=%x1e%H%x1f%P%x1f%ct%x1f%B%x1f"
_TEST_STEM = re.compile(r"^(tests?|test_.*|.*_test)$")


class GitError(RuntimeError):
    """The repository could not be read."""


@dataclass(frozen=True)
class FileChange:
    status: str  # A, M, D, R, C, T
    old_path: str | None
    new_path: str | None
    old_blob: str | None
    new_blob: str | None
    old_mode: str = "100644"
    new_mode: str = "100644"

    @property
    def path(self) -> str:
        return self.new_path if self.new_path is not None else self.old_path  # type: ignore[return-value]


@dataclass(frozen=True)
class CommitRecord:
    id: str
    timestamp: datetime
    message: str
    per_file: dict[str, tuple[int, int]]
    parent: str | None = None
    renames: tuple[tuple[str, str], ...] = ()
    changes: tuple[FileChange, ...] = field(default=(), compare=False, repr=False)

    def touches(self, path: str) -> bool:
        return path in self.per_file or any(path in pair for pair in self.renames)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "timestamp": self.timestamp.strftime("%Y-%m-%dT%H:%M:%SZ"),
            "message": self.message,
            "per_file": {p: list(v) for p, v in sorted(self.per_file.items())},
            "parent": self.parent,
            "renames": [list(r) for r in self.renames],
        }

    @classmethod
    def from_dict(cls, data: dict) -> CommitRecord:
        ts = datetime.strptime(data["timestamp"], "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)
        per_file = {p: (int(v[0]), int(v[1])) for p, v in data["per_file"].items()}
        renames = tuple((r[0], r[1]) for r in data.get("renames", ()))
        return cls(data["id"], ts, data["message"], per_file, data.get("parent"), renames)


@dataclass(frozen=True)
class SnapshotAnalysis:
    path: str
    commit: str
    alerts: tuple[AlertInstance, ...]
    metrics: FileMetrics
    function_names: frozenset[str]

    def counts(self) -> dict[AlertKind, int]:
        return count_by_kind(list(self.alerts))

    def to_dict(self) -> dict:
        m = self.metrics
        return {
            "path": self.path,
            "commit": self.commit,
            "alerts": [a.to_dict() for a in self.alerts],
            "metrics": {"mccabe_max": m.mccabe_max, "mccabe_sum": m.mccabe_sum, "loc": m.loc,
                        "function_count": m.function_count,
                        "halstead_volume": round(m.halstead_volume, 6),
                        "halstead_effort": round(m.halstead_effort, 6)},
            "function_names": sorted(self.function_names),
        }

    @classmethod
    def from_dict(cls, data: dict) -> SnapshotAnalysis:
        return cls(
            data["path"], data["commit"],
            tuple(AlertInstance.from_dict(a) for a in data["alerts"]),
            FileMetrics(**data["metrics"]),
            frozenset(data["function_names"]),
        )


@dataclass(frozen=True)
class RemovalEvent:
    alert_kind: AlertKind
    path: str
    commit: CommitRecord
    removed_count: int
    before: SnapshotAnalysis
    after: SnapshotAnalysis
    mccabe_max_diff: int
    mccabe_sum_diff: int
    loc_diff: int
    added_lines: int
    deleted_lines: int
    new_function_added: bool
    message_mentions_refactor: bool
    windows: tuple[CCPWindow, CCPWindow] | None = None

    @property
    def id(self) -> str:
        return event_id(self.commit.id, self.path, self.alert_kind)


def event_id(commit: str, path: str, kind: AlertKind | str) -> str:
    """Stable short identifier used to join ground-truth labels."""
    digest = hashlib.sha1(f"{commit}\0{path}\0{AlertKind(kind).value}".encode("utf-8"))
    return digest.hexdigest()[:16]


def is_test_path(path: str) -> bool:
    """True for paths under a ``test``/``tests`` directory or named like a test module."""
    parts = PurePosixPath(path.replace("\\", "/")).parts
    if any(part in ("test", "tests") for part in parts[:-1]):
        return True
    return bool(parts) and bool(_TEST_STEM.match(PurePosixPath(parts[-1]).stem))


class GitRepo:
    """Read-only handle on a git working copy or bare repository."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        if not self.path.is_dir():
            raise GitError(f"{self.path}: not a directory")
        probe = self._run(["rev-parse", "--git-dir"], check=False)
        if probe.returncode != 0:
            raise GitError(f"{self.path}: not a git repository")
        self._commits: list[CommitRecord] | None = None

    def _run(self, args: Sequence[str], *, input: bytes | None = None,
             check: bool = True) -> subprocess.CompletedProcess:
        try:
            proc = subprocess.run(["git", "-C", str(self.path), *args], input=input,
                                  capture_output=True, check=False)
        except OSError as exc:
            raise GitError(f"cannot run git: {exc}") from None
        if check and proc.returncode != 0:
            msg = proc.stderr.decode("utf-8", "replace").strip()
            raise GitError(f"git {args[0]} failed: {msg}")
        return proc

    def has_commits(self) -> bool:
        return self._run(["rev-parse", "--verify", "-q", "HEAD"], check=False).returncode == 0

    def commits(self) -> list[CommitRecord]:
        """First-parent timeline of HEAD, oldest first."""
        if self._commits is None:
            if not self.has_commits():
                self._commits = []
            else:
                out = self._run(["log", "--first-parent", "--reverse", "-M", "--raw", "--numstat",
                                 "--no-abbrev", "-z", "--diff-merges=first-parent", _LOG_FORMAT]).stdout
                self._commits = parse_log(out)
        return self._commits

    def read_blobs(self, shas: Iterable[str]) -> dict[str, bytes]:
        wanted = sorted(set(shas))
        if not wanted:
            return {}
        out = self._run(["cat-file", "--batch"], input=("\n".join(wanted) + "\n").encode()).stdout
        blobs: dict[str, bytes] = {}
        pos = 0
        for sha in wanted:
            eol = out.index(b"\n", pos)
            header = out[pos:eol].split()
            if len(header) < 3 or header[1] == b"missing":
                raise GitError(f"missing object {sha}")
            size = int(header[2])
            blobs[sha] = out[eol + 1:eol + 1 + size]
            pos = eol + 1 + size + 1
        return blobs

    def tree(self, commit: str) -> dict[str, str]:
        """path -> blob sha for regular files at ``commit``."""
        out = self._run(["ls-tree", "-r", "-z", "--full-tree", commit]).stdout
        entries = {}
        for item in out.split(b"\0"):
            if not item:
                continue
            meta, _, path = item.partition(b"\t")
            mode, kind, sha = meta.decode().split()
            if kind == "blob" and mode not in _SKIPPED_MODES:
                entries[path.decode("utf-8", "surrogateescape")] = sha
        return entries


def parse_log(raw: bytes) -> list[CommitRecord]:
    """Parse ``git log -z --raw --numstat`` output produced with ``_LOG_FORMAT``."""
    records = []
    for chunk in raw.split(b"\x1e")[1:]:
        sha, parents, ts, body, rest = chunk.split(b"\x1f", 4)
        parent_ids = parents.decode().split()
        changes, per_file, renames = _parse_diff(rest)
        records.append(CommitRecord(
            id=sha.decode(),
            timestamp=datetime.fromtimestamp(int(ts), tz=timezone.utc),
            message=body.decode("utf-8", "replace").rstrip("\n"),
            per_file=per_file,
            parent=parent_ids[0] if parent_ids else None,
            renames=tuple(renames),
            changes=tuple(changes),
        ))
    return records


def _parse_diff(rest: bytes):
    items = [i.decode("utf-8", "surrogateescape") for i in rest.split(b"\0")]
    changes: list[FileChange] = []
    per_file: dict[str, tuple[int, int]] = {}
    renames: list[tuple[str, str]] = []
    i = 0
    while i < len(items):
        item = items[i].lstrip("\n")
        i += 1
        if not item:
            continue
        if item.startswith(":"):
            old_mode, new_mode, old_sha, new_sha, status = item[1:].split()
            letter = status[0]
            if letter in "RC":
                old_path, new_path = items[i], items[i + 1]
                i += 2
                if letter == "R":
                    renames.append((old_path, new_path))
            else:
                old_path = new_path = items[i]
                i += 1
                if letter == "A":
                    old_path = None
                elif letter == "D":
                    new_path = None
            changes.append(FileChange(
                letter, old_path, new_path,
                None if old_sha == NULL_SHA else old_sha,
                None if new_sha == NULL_SHA else new_sha,
                old_mode, new_mode,
            ))
        else:
            added, deleted, path = item.split("\t", 2)
            if not path:  # rename or copy: old and new path follow
                path = items[i + 1]
                i += 2
            per_file[path] = (_count(added), _count(deleted))
    return changes, per_file, renames


def _count(text: str) -> int:
    return 0 if text == "-" else int(text)


def file_history(commits: Sequence[CommitRecord], path: str, anchor: str | None = None) -> list[CommitRecord]:
    """Commits touching ``path``, following reported renames.

    Without ``anchor`` ``path`` is the name at the end of ``commits``. With
    an anchor commit id, ``path`` is the name at that commit and renames are
    followed both backwards and forwards from it.
    """
    if anchor is None:
        split = len(commits)
    else:
        split = next((k for k, c in enumerate(commits) if c.id == anchor), None)
        if split is None:
            return []
        split += 1
    picked = []
    name: str | None = path
    for commit in reversed(commits[:split]):
        if name is None:
            break
        if commit.touches(name):
            picked.append(commit)
            if any(c.new_path == name and c.status == "A" for c in commit.changes):
                name = None
            else:
                name = next((old for old, new in commit.renames if new == name), name)
    picked.reverse()
    name = path
    for commit in commits[split:]:
        if commit.touches(name):
            picked.append(commit)
            moved = next((new for old, new in commit.renames if old == name), None)
            if moved is not None:
                name = moved
            elif any(c.old_path == name and c.status == "D" for c in commit.changes):
                break
    return picked


def list_commits(repo: GitRepo, path: str | None = None) -> list[CommitRecord]:
    commits = repo.commits()
    return list(commits) if path is None else file_history(commits, path)


def analyze_snapshot(content: bytes | str, path: str, commit: str = "",
                     cfg: DetectorConfig | None = None) -> SnapshotAnalysis | None:
    """Alerts, file metrics and function names of one file version; None if unparseable."""
    unit = parse_source(content, path)
    if not unit.parse_ok:
        return None
    return SnapshotAnalysis(
        path=path,
        commit=commit,
        alerts=tuple(detect_all(unit, cfg)),
        metrics=file_metrics(unit),
        function_names=frozenset(fn.qualified_name for fn in unit.functions),
    )


def _analyze_job(job: tuple[bytes, str, DetectorConfig]) -> SnapshotAnalysis | None:
    content, path, cfg = job
    return analyze_snapshot(content, path, "", cfg)


def analyze_many(jobs: list[tuple[bytes, str, DetectorConfig]], workers: int) -> list[SnapshotAnalysis | None]:
    if workers <= 1 or len(jobs) < 2:
        return [_analyze_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_analyze_job, jobs, chunksize=max(1, len(jobs) // (workers * 8))))


def _as_utc(instant: datetime) -> datetime:
    return instant.replace(tzinfo=timezone.utc) if instant.tzinfo is None else instant


def _last_at(commits: Sequence[CommitRecord], instant: datetime) -> CommitRecord | None:
    instant = _as_utc(instant)
    last = None
    for commit in commits:
        if commit.timestamp <= instant:
            last = commit
    return last


def _wanted(path: str, include_tests: bool) -> bool:
    return path.endswith(".py") and (include_tests or not is_test_path(path))


def snapshot_filter(repo: GitRepo, snapshot_a: datetime, snapshot_b: datetime,
                    cfg: RunConfig | None = None) -> list[tuple[str, AlertKind]]:
    """(path, kind) pairs present at snapshot A, absent at B, for files changed in between."""
    cfg = cfg or RunConfig()
    a, b = _as_utc(snapshot_a), _as_utc(snapshot_b)
    if not a < b:
        raise ValueError("snapshot_a must precede snapshot_b")
    commits = repo.commits()
    at_a, at_b = _last_at(commits, a), _last_at(commits, b)
    if at_a is None or at_b is None:
        return []
    changed = {p for c in commits if a < c.timestamp <= b for p in c.per_file}
    tree_a, tree_b = repo.tree(at_a.id), repo.tree(at_b.id)
    paths = sorted(p for p in tree_a if p in tree_b and p in changed and _wanted(p, cfg.include_tests))
    blobs = repo.read_blobs([tree_a[p] for p in paths] + [tree_b[p] for p in paths])
    pairs = []
    for path in paths:
        before = analyze_snapshot(blobs[tree_a[path]], path, at_a.id, cfg.detectors)
        after = analyze_snapshot(blobs[tree_b[path]], path, at_b.id, cfg.detectors)
        if before is None or after is None:
            log.warning("%s: unparseable at a snapshot, skipped", path)
            continue
        count_a, count_b = before.counts(), after.counts()
        pairs.extend((path, kind) for kind in sorted(AlertKind, key=lambda k: k.value)
                     if count_a[kind] > 0 and count_b[kind] == 0)
    return pairs


def mine_removals(repo: GitRepo, targets: Iterable[tuple[str, AlertKind]] | None = None,
                  cfg: RunConfig | None = None, *, jobs: int | None = None,
                  between: tuple[datetime, datetime] | None = None) -> list[RemovalEvent]:
    """Emit one event per (commit, file, kind) whose alert count strictly decreased.

    ``targets`` restricts mining to the given (path, kind) pairs; ``between``
    restricts it to commits with a timestamp in the half-open range (a, b].
    """
    cfg = cfg or RunConfig()
    workers = cfg.jobs if jobs is None else jobs
    target_kinds: dict[str, set[AlertKind]] | None = None
    if targets is not None:
        target_kinds = {}
        for path, kind in targets:
            target_kinds.setdefault(path, set()).add(AlertKind(kind))
    refactor_re = keyword_pattern(tuple(cfg.refactor_keywords))
    lo, hi = (None, None) if between is None else (_as_utc(between[0]), _as_utc(between[1]))

    tasks: list[tuple[CommitRecord, FileChange]] = []
    for commit in repo.commits():
        if lo is not None and not lo < commit.timestamp <= hi:
            continue
        for change in sorted(commit.changes, key=lambda c: c.path):
            if change.old_blob is None or change.old_path is None:
                continue  # added file: nothing to remove
            if change.old_mode in _SKIPPED_MODES or change.new_mode in _SKIPPED_MODES:
                continue
            if not _wanted(change.path, cfg.include_tests) or not change.old_path.endswith(".py"):
                continue
            if target_kinds is not None and change.path not in target_kinds:
                continue
            tasks.append((commit, change))

    keys: dict[tuple[str, str], None] = {}
    for _, change in tasks:
        keys[(change.old_blob, change.old_path)] = None
        if change.new_blob is not None:
            keys[(change.new_blob, change.new_path)] = None
    blobs = repo.read_blobs(sha for sha, _ in keys)
    order = list(keys)
    results = analyze_many([(blobs[sha], path, cfg.detectors) for sha, path in order], workers)
    cache = dict(zip(order, results))

    events: list[RemovalEvent] = []
    for commit, change in tasks:
        before = cache[(change.old_blob, change.old_path)]
        if change.new_blob is None:
            after = analyze_snapshot("", change.old_path, commit.id, cfg.detectors)
        else:
            after = cache[(change.new_blob, change.new_path)]
        if before is None or after is None:
            side = "parent" if before is None else "child"
            log.warning("%s@%s: unparseable %s snapshot, skipped", change.path, commit.id[:12], side)
            continue
        before = replace(before, commit=commit.parent or "")
        after = replace(after, commit=commit.id)
        events.extend(_events_for(commit, change.path, before, after, refactor_re,
                                  None if target_kinds is None else target_kinds[change.path]))
    return events


def _events_for(commit: CommitRecord, path: str, before: SnapshotAnalysis, after: SnapshotAnalysis,
                refactor_re: re.Pattern[str], kinds: set[AlertKind] | None) -> list[RemovalEvent]:
    count_before, count_after = before.counts(), after.counts()
    added, deleted = commit.per_file.get(path, (0, 0))
    out = []
    for kind in sorted(AlertKind, key=lambda k: k.value):
        removed = count_before[kind] - count_after[kind]
        if removed <= 0 or (kinds is not None and kind not in kinds):
            continue
        out.append(RemovalEvent(
            alert_kind=kind,
            path=path,
            commit=commit,
            removed_count=removed,
            before=before,
            after=after,
            mccabe_max_diff=after.metrics.mccabe_max - before.metrics.mccabe_max,
            mccabe_sum_diff=after.metrics.mccabe_sum - before.metrics.mccabe_sum,
            loc_diff=after.metrics.loc - before.metrics.loc,
            added_lines=added,
            deleted_lines=deleted,
            new_function_added=bool(after.function_names - before.function_names),
            message_mentions_refactor=bool(refactor_re.search(commit.message)),
        ))
    return out
