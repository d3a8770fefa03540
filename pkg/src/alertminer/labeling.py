"""Clause predicates over removal events and the labeling functions built from them.

Clauses are registered by name so labeling functions can be declared as
data: a conjunction of clause names, each optionally negated.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from alertminer.vcs import RemovalEvent

Clause = Callable[[RemovalEvent], bool]

MASSIVE_CHANGE_LINES = 300
MOSTLY_DELETE_RATIO = 3


def clause_added_lines(event: RemovalEvent) -> bool:
    return event.added_lines > 0


def clause_new_function(event: RemovalEvent) -> bool:
    return event.new_function_added


def clause_massive_change(event: RemovalEvent) -> bool:
    return event.added_lines + event.deleted_lines >= MASSIVE_CHANGE_LINES


def clause_mostly_delete(event: RemovalEvent) -> bool:
    return event.deleted_lines > MOSTLY_DELETE_RATIO * event.added_lines


def clause_mccabe_reduced(event: RemovalEvent) -> bool:
    return event.mccabe_max_diff < 0


def clause_single_line(event: RemovalEvent) -> bool:
    """At most one line added and at most one deleted."""
    return event.added_lines <= 1 and event.deleted_lines <= 1


def clause_refactor_message(event: RemovalEvent) -> bool:
    return event.message_mentions_refactor


CLAUSES: dict[str, Clause] = {
    "added_lines": clause_added_lines,
    "new_function": clause_new_function,
    "massive_change": clause_massive_change,
    "mostly_delete": clause_mostly_delete,
    "mccabe_reduced": clause_mccabe_reduced,
    "single_line": clause_single_line,
    "refactor_message": clause_refactor_message,
}


@dataclass(frozen=True)
class ClauseVerdict:
    clause: str
    hit: bool


@dataclass(frozen=True)
class LabelingFunction:
    """Conjunction of clauses; a term written ``"!name"`` is negated."""

    name: str
    terms: tuple[str, ...]

    def __post_init__(self) -> None:
        for term in self.terms:
            if term.lstrip("!") not in CLAUSES:
                raise KeyError(f"unknown clause {term!r} in labeling function {self.name!r}")

    def __call__(self, event: RemovalEvent) -> bool:
        for term in self.terms:
            negated = term.startswith("!")
            if CLAUSES[term.lstrip("!")](event) == negated:
                return False
        return True


REDUCED_MCCABE = LabelingFunction("Max McCabe reduction and new lines", ("mccabe_reduced", "added_lines"))
SUITABLE_MCCABE = LabelingFunction("Suitable McCabe reduction",
                                   ("mccabe_reduced", "added_lines", "!mostly_delete", "!massive_change"))
ADDED_FUNCTION = LabelingFunction("Added function refactor", ("new_function",))
LABELING_FUNCTIONS = (REDUCED_MCCABE, SUITABLE_MCCABE, ADDED_FUNCTION)


def lf_reduced_mccabe(event: RemovalEvent) -> bool:
    return REDUCED_MCCABE(event)


def lf_suitable_mccabe(event: RemovalEvent) -> bool:
    return SUITABLE_MCCABE(event)


def lf_added_function(event: RemovalEvent) -> bool:
    return ADDED_FUNCTION(event)


def clause_verdicts(event: RemovalEvent) -> list[ClauseVerdict]:
    return [ClauseVerdict(name, clause(event)) for name, clause in CLAUSES.items()]


@dataclass(frozen=True)
class LabeledEvent:
    event: RemovalEvent
    is_refactor: bool | None = None


@dataclass(frozen=True)
class FunctionEvalRow:
    """recall is hits / |events|; refactor_precision is None without hits."""

    name: str
    hits: int
    total: int
    recall: float
    refactor_precision: float | None


def evaluate_functions(events: Sequence[LabeledEvent],
                       functions: Iterable[LabelingFunction | Clause]) -> list[FunctionEvalRow]:
    if any(e.is_refactor is None for e in events):
        raise ValueError("every event needs a ground-truth label")
    rows = []
    for fn in functions:
        name = getattr(fn, "name", None) or getattr(fn, "__name__", str(fn))
        accepted = [e for e in events if fn(e.event)]
        hits = len(accepted)
        recall = hits / len(events) if events else 0.0
        precision = sum(e.is_refactor for e in accepted) / hits if hits else None
        rows.append(FunctionEvalRow(name, hits, len(events), recall, precision))
    return rows


def read_labels(path: str | Path) -> dict[str, bool]:
    """CSV with columns ``event_id,is_refactor``; booleans as true/false/1/0/yes/no."""
    truth = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}
    labels: dict[str, bool] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or not {"event_id", "is_refactor"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected columns event_id,is_refactor")
        for lineno, row in enumerate(reader, start=2):
            value = (row["is_refactor"] or "").strip().lower()
            if value not in truth:
                raise ValueError(f"{path}:{lineno}: bad is_refactor value {row['is_refactor']!r}")
            labels[row["event_id"].strip()] = truth[value]
    return labels


def attach_labels(events: Iterable[RemovalEvent], labels: Mapping[str, bool]) -> list[LabeledEvent]:
    return [LabeledEvent(e, labels.get(e.id)) for e in events]
