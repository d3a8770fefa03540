"""``alertminer`` command line.

Exit codes: 0 success, 1 user error (bad input, config or repository),
2 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import traceback
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from alertminer import ccp as ccp_mod
from alertminer import impact, labeling, learners, reports
from alertminer.config import ConfigError, RunConfig, load_config
from alertminer.detectors import AlertKind
from alertminer.picker import pick_candidates, python_files
from alertminer.store import StoreError, read_events, write_events
from alertminer.vcs import GitError, GitRepo, analyze_many, mine_removals, snapshot_filter

log = logging.getLogger("alertminer")

DEFAULT_OUTPUT = "alertminer-out"


class UserError(Exception):
    pass


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    default = argparse.SUPPRESS if suppress else None
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", default=default, help="YAML config file")
    p.add_argument("--seed", type=int, default=default, help="random seed (overrides config)")
    p.add_argument("--jobs", type=int, default=default, help="worker processes")
    p.add_argument("--output", default=default, help=f"output directory (default {DEFAULT_OUTPUT})")
    p.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS if suppress else 0)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alertminer", parents=[_global_flags(False)],
                                     description="Static-analysis alert removal mining and analysis.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_global_flags(True)]

    p = sub.add_parser("scan", parents=common, help="run detectors and metrics on files")
    p.add_argument("paths", nargs="+")

    p = sub.add_parser("pick", parents=common, help="plan a control/intervention split")
    p.add_argument("root")

    p = sub.add_parser("mine", parents=common, help="mine alert-removal events from a git repository")
    p.add_argument("repo")
    p.add_argument("--since", help="snapshot A (ISO date); with --until, gate pairs by snapshots")
    p.add_argument("--until", help="snapshot B (ISO date)")
    p.add_argument("--include-tests", action="store_true", default=None)

    p = sub.add_parser("label", parents=common, help="evaluate clauses and labeling functions")
    p.add_argument("events")
    p.add_argument("--labels", help="CSV with event_id,is_refactor")

    p = sub.add_parser("ccp", parents=common, help="repository CCP and event windows")
    p.add_argument("repo")
    p.add_argument("--events", help="re-attach windows to this events file")
    p.add_argument("--recall", type=float, help="classifier recall for the MLE correction")
    p.add_argument("--fpr", type=float, help="classifier false-positive rate for the MLE correction")

    p = sub.add_parser("impact", parents=common, help="CCP difference by context and alert")
    p.add_argument("events")

    p = sub.add_parser("features", parents=common, help="evaluate single features")
    p.add_argument("events")

    p = sub.add_parser("train", parents=common, help="train and test the small learners")
    p.add_argument("events")
    p.add_argument("--max-depth", type=int, default=3)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--learning-rate", type=float, default=0.5)
    p.add_argument("--l2", type=float, default=0.01)
    return parser


def _parse_instant(text: str) -> datetime:
    try:
        value = datetime.fromisoformat(text)
    except ValueError:
        raise UserError(f"not an ISO date: {text!r}") from None
    return value if value.tzinfo else value.replace(tzinfo=timezone.utc)


def _out_dir(args: argparse.Namespace, cfg: RunConfig) -> Path:
    out = Path(args.output or cfg.output or DEFAULT_OUTPUT)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_scan(args: argparse.Namespace, cfg: RunConfig) -> int:
    targets: list[tuple[Path, str]] = []
    for raw in args.paths:
        path = Path(raw)
        if path.is_dir():
            targets += [(f, f.relative_to(path).as_posix()) for f in python_files(path)]
        elif path.is_file():
            targets.append((path, path.as_posix()))
        else:
            log.error("%s: no such file or directory", raw)
    jobs, failures = [], 0
    for path, name in targets:
        try:
            jobs.append((path.read_bytes(), name, cfg.detectors))
        except OSError as exc:
            log.error("%s: unreadable: %s", name, exc)
            failures += 1
    records, totals = [], dict.fromkeys(sorted(AlertKind, key=lambda k: k.value), 0)
    for (_, name, _), analysis in zip(jobs, analyze_many(jobs, cfg.jobs)):
        if analysis is None:
            log.error("%s: could not be parsed", name)
            failures += 1
            continue
        record = analysis.to_dict()
        record.pop("commit")
        records.append(record)
        for alert in analysis.alerts:
            totals[alert.kind] += 1
    out = _out_dir(args, cfg)
    with open(out / "alerts.jsonl", "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(json.dumps(record, sort_keys=True) + "\n")
    rows = [(k.value, n) for k, n in totals.items()]
    reports.write_table(out, "scan_summary", ("alert", "count"), rows, "Alerts by kind")
    print(f"analyzed {len(records)} files, {sum(totals.values())} alerts -> {out}")
    if not records and (failures or len(args.paths) != sum(Path(p).exists() for p in args.paths)):
        return 1
    return 0


def cmd_pick(args: argparse.Namespace, cfg: RunConfig) -> int:
    root = Path(args.root)
    if not root.is_dir():
        raise UserError(f"{root}: not a directory")
    plan = pick_candidates(root, cfg)
    out = _out_dir(args, cfg)
    (out / "plan.json").write_text(plan.to_json(), encoding="utf-8")
    (out / "plan.md").write_text(plan.to_markdown(), encoding="utf-8")
    print(f"{len(plan.intervention)} intervention, {len(plan.control)} control, "
          f"{len(plan.excluded)} excluded -> {out}")
    return 0


def cmd_mine(args: argparse.Namespace, cfg: RunConfig) -> int:
    repo = GitRepo(args.repo)
    if args.include_tests:
        cfg = replace(cfg, include_tests=True)
    targets = between = None
    if args.since or args.until:
        if not (args.since and args.until):
            raise UserError("--since and --until go together")
        a, b = _parse_instant(args.since), _parse_instant(args.until)
        if not a < b:
            raise UserError("--since must precede --until")
        targets = snapshot_filter(repo, a, b, cfg)
        between = (a, b)
    events = mine_removals(repo, targets, cfg, between=between)
    events = ccp_mod.attach_windows(events, repo.commits(), cfg)
    out = _out_dir(args, cfg)
    n = write_events(events, out / "events.jsonl")
    windowed = sum(e.windows is not None for e in events)
    print(f"{n} removal events ({windowed} with CCP windows) -> {out / 'events.jsonl'}")
    return 0


def cmd_label(args: argparse.Namespace, cfg: RunConfig) -> int:
    events = read_events(args.events)
    labels = labeling.read_labels(args.labels) if args.labels else {}
    functions = [*(_named(n, c) for n, c in labeling.CLAUSES.items()), *labeling.LABELING_FUNCTIONS]
    labeled = [e for e in labeling.attach_labels(events, labels) if e.is_refactor is not None]
    if args.labels and len(labeled) < len(events):
        log.warning("%d of %d events have no ground-truth label and are left out",
                    len(events) - len(labeled), len(events))
    if labeled:
        rows = labeling.evaluate_functions(labeled, functions)
    else:
        rows = []
        for fn in functions:
            hits = sum(bool(fn(e)) for e in events)
            rows.append(labeling.FunctionEvalRow(fn.name, hits, len(events),
                                                 hits / len(events) if events else 0.0, None))
    out = _out_dir(args, cfg)
    reports.write_table(out, "labeling", reports.LABEL_HEADERS, reports.label_rows(rows),
                        "Clauses and labeling functions")
    print(f"evaluated {len(rows)} functions over {len(labeled) or len(events)} events -> {out}")
    return 0


def _named(name: str, clause):
    return labeling.LabelingFunction(name, (name,)) if name in labeling.CLAUSES else clause


def cmd_ccp(args: argparse.Namespace, cfg: RunConfig) -> int:
    repo = GitRepo(args.repo)
    commits = repo.commits()
    out = _out_dir(args, cfg)
    lines = []
    if commits:
        window = ccp_mod.ccp_of(commits, cfg.corrective_keywords)
        lines.append(f"commits: {window.total}")
        lines.append(f"corrective: {window.corrective_count}")
        lines.append(f"ccp: {window.ccp:.6f}")
        if args.recall is not None or args.fpr is not None:
            if args.recall is None or args.fpr is None:
                raise UserError("--recall and --fpr go together")
            quality = ccp_mod.ClassifierQuality(args.recall, args.fpr)
            lines.append(f"ccp (mle corrected): {ccp_mod.mle_positive_rate(window.ccp, quality):.6f}")
    else:
        lines.append("commits: 0")
    (out / "ccp.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("\n".join(lines))
    if args.events:
        events = ccp_mod.attach_windows(read_events(args.events), commits, cfg)
        n = write_events(events, out / "events.jsonl")
        print(f"re-windowed {n} events -> {out / 'events.jsonl'}")
    return 0


def cmd_impact(args: argparse.Namespace, cfg: RunConfig) -> int:
    events = [e for e in read_events(args.events) if e.windows is not None]
    rows = impact.impact_table(events) + impact.group_table(events, cfg)
    out = _out_dir(args, cfg)
    reports.write_table(out, "impact", reports.IMPACT_HEADERS, reports.impact_rows(rows),
                        "CCP difference after alert removal")
    print(f"{len(rows)} rows over {len(events)} windowed events -> {out}")
    return 0


def cmd_features(args: argparse.Namespace, cfg: RunConfig) -> int:
    events = [e for e in read_events(args.events) if e.windows is not None]
    out = _out_dir(args, cfg)
    rows = []
    if events:
        names, matrix, labels = impact.feature_matrix(events, impact.fit_quartiles(events), cfg)
        rows = impact.evaluate_features(names, matrix, labels)
    reports.write_table(out, "features", reports.EVAL_HEADERS, reports.eval_rows(rows),
                        "Single-feature classifiers of CCP reduction")
    print(f"{len(rows)} features over {len(events)} windowed events -> {out}")
    return 0


def cmd_train(args: argparse.Namespace, cfg: RunConfig) -> int:
    if args.max_depth < 1:
        raise UserError("--max-depth must be >= 1")
    events = [e for e in read_events(args.events) if e.windows is not None]
    out = _out_dir(args, cfg)
    if len(events) < 3:
        rows: list = []
        text = f"too few windowed events to train ({len(events)})\n"
    else:
        labels_all = np.array([impact.ccp_diff(e) < 0 for e in events])
        train_idx, test_idx = impact.stratified_split(labels_all, cfg.seed)
        train_events = [events[i] for i in train_idx]
        test_events = [events[i] for i in test_idx]
        thresholds = impact.fit_quartiles(train_events)
        names, X_train, y_train = impact.feature_matrix(train_events, thresholds, cfg)
        _, X_test, y_test = impact.feature_matrix(test_events, thresholds, cfg)
        tree = learners.train_tree(X_train, y_train, args.max_depth)
        model = learners.train_logistic(X_train, y_train, args.learning_rate, args.epochs, args.l2)
        base = float(np.mean(y_test)) if len(y_test) else 0.0
        rows = []
        if len(y_test):
            rows = [impact.evaluate_feature(tree.predict(X_test), y_test, base, f"tree depth {args.max_depth}"),
                    impact.evaluate_feature(model.predict(X_test), y_test, base, "logistic regression")]
        text = "\n".join([
            f"train {len(train_idx)} / test {len(test_idx)} events, seed {cfg.seed}",
            f"quartile cuts (train split): {json.dumps(thresholds.to_dict(), sort_keys=True)}",
            "", "decision tree:", tree.rules(names),
            "", "logistic regression:", model.summary(names), "",
        ])
    reports.write_table(out, "train", reports.EVAL_HEADERS, reports.eval_rows(rows), "Test-set performance")
    (out / "models.txt").write_text(text, encoding="utf-8")
    print(f"trained on {len(events)} windowed events -> {out}")
    return 0


COMMANDS = {
    "scan": cmd_scan, "pick": cmd_pick, "mine": cmd_mine, "label": cmd_label,
    "ccp": cmd_ccp, "impact": cmd_impact, "features": cmd_features, "train": cmd_train,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="alertminer: %(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config, seed=args.seed, jobs=args.jobs, output=args.output)
        return COMMANDS[args.command](args, cfg)
    except (UserError, ConfigError, StoreError, GitError, ValueError, KeyError) as exc:
        log.error("%s", exc)
        return 1
    except Exception:  # pragma: no cover - reported as an internal failure
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
