"""Seeded control/intervention split of a working tree with one alert candidate per file."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from alertminer.config import RunConfig
from alertminer.detectors import AlertKind
from alertminer.vcs import analyze_many, is_test_path

MAX_INSTANCES = 2


@dataclass(frozen=True)
class Candidate:
    path: str
    kind: AlertKind
    lines: tuple[int, ...]


@dataclass(frozen=True)
class CandidatePlan:
    seed: int
    control: list[str] = field(default_factory=list)
    intervention: list[Candidate] = field(default_factory=list)
    excluded: list[tuple[str, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "control": self.control,
            "intervention": [{"path": c.path, "kind": c.kind.value, "lines": list(c.lines)}
                             for c in self.intervention],
            "excluded": [{"path": p, "reason": r} for p, r in self.excluded],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_markdown(self) -> str:
        out = [f"# Intervention plan (seed {self.seed})", ""]
        out.append(f"Control files: {len(self.control)}. Intervention files: {len(self.intervention)}.")
        out.append("")
        for cand in self.intervention:
            lines = ", ".join(map(str, cand.lines))
            out += [f"## {cand.path}", "", f"- [ ] remove `{cand.kind.value}` (line {lines})", ""]
        if self.control:
            out += ["## Control (leave untouched)", ""] + [f"- {p}" for p in self.control] + [""]
        if self.excluded:
            out += ["## Excluded", ""] + [f"- {p}: {r}" for p, r in self.excluded] + [""]
        return "\n".join(out)


def python_files(root: Path) -> list[Path]:
    """Non-test ``.py`` files below ``root``, skipping hidden directories, sorted."""
    found = []
    for path in root.rglob("*.py"):
        rel = path.relative_to(root)
        if any(part.startswith(".") for part in rel.parts[:-1]):
            continue
        if path.is_file() and not is_test_path(rel.as_posix()):
            found.append(path)
    return sorted(found, key=lambda p: p.relative_to(root).as_posix())


def pick_candidates(root: str | Path, cfg: RunConfig | None = None, seed: int | None = None) -> CandidatePlan:
    cfg = cfg or RunConfig()
    seed = cfg.seed if seed is None else seed
    root = Path(root)
    files = python_files(root)
    rels = [f.relative_to(root).as_posix() for f in files]

    excluded: list[tuple[str, str]] = []
    jobs = []
    for f, rel in zip(files, rels):
        try:
            jobs.append((f.read_bytes(), rel, cfg.detectors))
        except OSError:
            excluded.append((rel, "unreadable"))
    analyses = analyze_many(jobs, cfg.jobs)

    eligible: dict[str, dict[AlertKind, tuple[int, ...]]] = {}
    for (_, rel, _), analysis in zip(jobs, analyses):
        if analysis is None:
            excluded.append((rel, "unparseable"))
            continue
        lines: dict[AlertKind, list[int]] = {}
        for alert in analysis.alerts:
            lines.setdefault(alert.kind, []).append(alert.line)
        kinds = {k: tuple(v) for k, v in lines.items() if 1 <= len(v) <= MAX_INSTANCES}
        if kinds:
            eligible[rel] = kinds
        else:
            excluded.append((rel, "no eligible kind"))

    rng = random.Random(seed)
    order = sorted(eligible)
    rng.shuffle(order)
    half = len(order) // 2
    control = sorted(order[:half])
    intervention = []
    for rel in sorted(order[half:]):
        kinds = sorted(eligible[rel], key=lambda k: k.value)
        kind = kinds[rng.randrange(len(kinds))]
        intervention.append(Candidate(rel, kind, eligible[rel][kind]))
    return CandidatePlan(seed, control, intervention, sorted(excluded))
