"""CCP-difference aggregation, feature construction and single-feature evaluation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from alertminer.config import RunConfig
from alertminer.detectors import AlertKind
from alertminer.labeling import (
    clause_massive_change,
    clause_mostly_delete,
    clause_single_line,
    lf_added_function,
    lf_reduced_mccabe,
    lf_suitable_mccabe,
)
from alertminer.vcs import RemovalEvent

EventFilter = Callable[[RemovalEvent], bool]

CONTEXTS: dict[str, EventFilter] = {
    "all": lambda e: True,
    "single line": clause_single_line,
    "reduced McCabe": lf_reduced_mccabe,
    "suitable McCabe": lf_suitable_mccabe,
    "new function": lf_added_function,
    "refactor message": lambda e: e.message_mentions_refactor,
}

QUARTILE_QUANTITIES: dict[str, Callable[[RemovalEvent], float]] = {
    "mccabe_max_before": lambda e: e.before.metrics.mccabe_max,
    "mccabe_sum_before": lambda e: e.before.metrics.mccabe_sum,
    "mccabe_max_diff": lambda e: e.mccabe_max_diff,
    "mccabe_sum_diff": lambda e: e.mccabe_sum_diff,
}

BASE_FEATURES = ("mostly_delete", "only_removal", "massive_change", "is_refactor", "new_function",
                 "high_ccp_group", "low_ccp_group")


def ccp_diff(event: RemovalEvent) -> float:
    """CCP after minus CCP before, in percentage points."""
    if event.windows is None:
        raise ValueError(f"event {event.id} has no CCP windows")
    before, after = event.windows
    return 100.0 * (after.ccp - before.ccp)


def ccp_group(before_ccp: float, low: float = 0.09, high: float = 0.39) -> str:
    if before_ccp < low:
        return "low"
    if before_ccp > high:
        return "high"
    return "medium"


@dataclass(frozen=True)
class ImpactRow:
    context: str
    alert_kind: str
    mean_ccp_diff: float
    samples: int
    std_error: float | None
    mean_mccabe_diff: float | None


def aggregate_impact(events: Iterable[RemovalEvent], context_filter: EventFilter | None = None,
                     alert_filter: AlertKind | str | None = None, *,
                     context: str = "all") -> ImpactRow | None:
    """Mean CCP difference of the selected events; None for an empty selection.

    Events without windows are skipped. ``std_error`` is None for a single sample.
    """
    kind = None if alert_filter is None else AlertKind(alert_filter)
    chosen = [e for e in events
              if e.windows is not None
              and (kind is None or e.alert_kind == kind)
              and (context_filter is None or context_filter(e))]
    if not chosen:
        return None
    diffs = np.array([ccp_diff(e) for e in chosen], dtype=float)
    n = len(diffs)
    std_error = float(np.std(diffs, ddof=1) / math.sqrt(n)) if n > 1 else None
    return ImpactRow(
        context=context,
        alert_kind="all" if kind is None else kind.value,
        mean_ccp_diff=float(diffs.mean()),
        samples=n,
        std_error=std_error,
        mean_mccabe_diff=float(np.mean([e.mccabe_max_diff for e in chosen])),
    )


def impact_table(events: Sequence[RemovalEvent], contexts: Mapping[str, EventFilter] | None = None,
                 kinds: Iterable[AlertKind | None] | None = None) -> list[ImpactRow]:
    """One row per (context, kind) with at least one event; ``None`` kind means all kinds."""
    contexts = CONTEXTS if contexts is None else contexts
    if kinds is None:
        present = sorted({e.alert_kind for e in events}, key=lambda k: k.value)
        kinds = [None, *present]
    kinds = list(kinds)
    rows = []
    for name, flt in contexts.items():
        for kind in kinds:
            row = aggregate_impact(events, flt, kind, context=name)
            if row is not None:
                rows.append(row)
    return rows


def group_table(events: Sequence[RemovalEvent], cfg: RunConfig | None = None) -> list[ImpactRow]:
    """Control rows stratified by prior CCP group."""
    cfg = cfg or RunConfig()
    rows = []
    for group in ("low", "medium", "high"):
        def in_group(e: RemovalEvent, g: str = group) -> bool:
            return ccp_group(e.windows[0].ccp, cfg.ccp_low, cfg.ccp_high) == g
        row = aggregate_impact(events, in_group, context=f"{group} CCP")
        if row is not None:
            rows.append(row)
    return rows


@dataclass(frozen=True)
class QuartileThresholds:
    """25th and 75th percentiles per quantity, fitted on one event set."""

    cuts: dict[str, tuple[float, float]]

    def flags(self, quantity: str, value: float) -> tuple[bool, bool]:
        """(high, low). With q25 == q75 the comparisons become strict so the two stay exclusive."""
        q25, q75 = self.cuts[quantity]
        if q25 == q75:
            return value > q75, value < q25
        return value >= q75, value <= q25

    def to_dict(self) -> dict:
        return {k: list(v) for k, v in sorted(self.cuts.items())}


def fit_quartiles(events: Sequence[RemovalEvent]) -> QuartileThresholds:
    cuts = {}
    for name, getter in QUARTILE_QUANTITIES.items():
        values = np.array([getter(e) for e in events], dtype=float)
        if len(values) == 0:
            cuts[name] = (0.0, 0.0)
        else:
            q25, q75 = np.percentile(values, [25, 75])
            cuts[name] = (float(q25), float(q75))
    return QuartileThresholds(cuts)


def feature_names(kinds: Sequence[AlertKind] | None = None) -> list[str]:
    kinds = sorted(AlertKind, key=lambda k: k.value) if kinds is None else kinds
    names = list(BASE_FEATURES)
    for quantity in QUARTILE_QUANTITIES:
        names += [f"high_{quantity}", f"low_{quantity}"]
    names += [f"kind={k.value}" for k in kinds]
    return names


@dataclass(frozen=True)
class FeatureVector:
    flags: dict[str, bool]
    label: bool


def feature_vector(event: RemovalEvent, thresholds: QuartileThresholds,
                   cfg: RunConfig | None = None) -> FeatureVector:
    """Boolean features of a windowed event; the label is a strict CCP reduction."""
    cfg = cfg or RunConfig()
    group = ccp_group(event.windows[0].ccp, cfg.ccp_low, cfg.ccp_high)
    flags = {
        "mostly_delete": clause_mostly_delete(event),
        "only_removal": event.added_lines == 0,
        "massive_change": clause_massive_change(event),
        "is_refactor": event.message_mentions_refactor,
        "new_function": event.new_function_added,
        "high_ccp_group": group == "high",
        "low_ccp_group": group == "low",
    }
    for quantity, getter in QUARTILE_QUANTITIES.items():
        high, low = thresholds.flags(quantity, getter(event))
        flags[f"high_{quantity}"] = high
        flags[f"low_{quantity}"] = low
    for kind in AlertKind:
        flags[f"kind={kind.value}"] = event.alert_kind == kind
    return FeatureVector(flags, ccp_diff(event) < 0)


def feature_matrix(events: Sequence[RemovalEvent], thresholds: QuartileThresholds,
                   cfg: RunConfig | None = None) -> tuple[list[str], np.ndarray, np.ndarray]:
    """(names, boolean matrix, boolean labels) for the windowed events."""
    names = feature_names()
    vectors = [feature_vector(e, thresholds, cfg) for e in events if e.windows is not None]
    matrix = np.array([[v.flags[n] for n in names] for v in vectors], dtype=bool).reshape(len(vectors), len(names))
    labels = np.array([v.label for v in vectors], dtype=bool)
    return names, matrix, labels


@dataclass(frozen=True)
class EvalRow:
    name: str
    accuracy: float
    hit_rate: float
    precision: float | None
    precision_lift: float | None
    recall: float
    base_rate: float


def evaluate_feature(column: Sequence[bool] | np.ndarray, labels: Sequence[bool] | np.ndarray,
                     base_rate: float | None = None, name: str = "") -> EvalRow:
    """Treat a boolean column as a classifier of ``labels``.

    ``base_rate`` defaults to the positive rate of ``labels``.
    """
    pred = np.asarray(column, dtype=bool)
    truth = np.asarray(labels, dtype=bool)
    if pred.shape != truth.shape or pred.size == 0:
        raise ValueError("column and labels must be non-empty and of equal length")
    n = pred.size
    tp = int(np.sum(pred & truth))
    hits = int(pred.sum())
    positives = int(truth.sum())
    base = positives / n if base_rate is None else base_rate
    precision = tp / hits if hits else None
    lift = None if precision is None or base == 0 else precision / base - 1
    return EvalRow(
        name=name,
        accuracy=float(np.sum(pred == truth)) / n,
        hit_rate=hits / n,
        precision=precision,
        precision_lift=lift,
        recall=tp / positives if positives else 0.0,
        base_rate=base,
    )


def evaluate_features(names: Sequence[str], matrix: np.ndarray, labels: np.ndarray) -> list[EvalRow]:
    """All columns, ordered by precision lift descending (absent lifts last), then name."""
    base = float(np.mean(labels)) if len(labels) else 0.0
    rows = [evaluate_feature(matrix[:, j], labels, base, name) for j, name in enumerate(names)]
    return sorted(rows, key=lambda r: (r.precision_lift is None, -(r.precision_lift or 0.0), r.name))


def stratified_split(labels: Sequence[bool] | np.ndarray, seed: int,
                     test_fraction: float = 1 / 3) -> tuple[np.ndarray, np.ndarray]:
    """Seeded per-class shuffle; about ``test_fraction`` of each class goes to the test side."""
    y = np.asarray(labels, dtype=bool)
    rng = np.random.default_rng(seed)
    train, test = [], []
    for cls in (False, True):
        idx = np.flatnonzero(y == cls)
        rng.shuffle(idx)
        cut = int(round(len(idx) * test_fraction))
        test.extend(idx[:cut])
        train.extend(idx[cut:])
    return np.array(sorted(train), dtype=int), np.array(sorted(test), dtype=int)
