"""CSV and Markdown rendering for the tabular outputs."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Any, Sequence

from alertminer.impact import EvalRow, ImpactRow
from alertminer.labeling import FunctionEvalRow


def fmt(value: Any, digits: int = 3) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.{digits}f}"
    return str(value)


def to_csv(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(headers)
    for row in rows:
        writer.writerow([fmt(v, 6) for v in row])
    return buf.getvalue()


def to_markdown(headers: Sequence[str], rows: Sequence[Sequence[Any]], title: str | None = None) -> str:
    out = [f"## {title}", ""] if title else []
    out.append("| " + " | ".join(headers) + " |")
    out.append("|" + "|".join("---" for _ in headers) + "|")
    for row in rows:
        out.append("| " + " | ".join(fmt(v) for v in row) + " |")
    return "\n".join(out) + "\n"


def write_table(out_dir: Path, stem: str, headers: Sequence[str], rows: Sequence[Sequence[Any]],
                title: str | None = None) -> tuple[Path, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path, md_path = out_dir / f"{stem}.csv", out_dir / f"{stem}.md"
    csv_path.write_text(to_csv(headers, rows), encoding="utf-8")
    md_path.write_text(to_markdown(headers, rows, title), encoding="utf-8")
    return csv_path, md_path


LABEL_HEADERS = ("name", "hits", "recall", "refactor precision")
IMPACT_HEADERS = ("context", "alert", "ccp diff (pp)", "samples", "std error", "mccabe max diff")
EVAL_HEADERS = ("name", "accuracy", "hit rate", "precision", "precision lift", "recall", "base rate")


def label_rows(rows: Sequence[FunctionEvalRow]) -> list[tuple]:
    return [(r.name, r.hits, r.recall, r.refactor_precision) for r in rows]


def impact_rows(rows: Sequence[ImpactRow]) -> list[tuple]:
    return [(r.context, r.alert_kind, r.mean_ccp_diff, r.samples, r.std_error, r.mean_mccabe_diff)
            for r in rows]


def eval_rows(rows: Sequence[EvalRow]) -> list[tuple]:
    return [(r.name, r.accuracy, r.hit_rate, r.precision, r.precision_lift, r.recall, r.base_rate)
            for r in rows]
