"""Scripted repositories shared by several test modules."""

from __future__ import annotations

from pathlib import Path

from gitrepo import Commit, build_repo


def _chain(n: int) -> list[str]:
    out = []
    for b in range(n):
        out += [f"    {'if' if b == 0 else 'elif'} x == {b}:", f"        label = 'v{b}'"]
    return out


def app_before(version: int) -> str:
    """``handle`` has 13 branches: a 10-arm chain plus a guarded counting loop."""
    return "\n".join([
        f"VERSION = {version}",
        "",
        "",
        "def handle(x, items):",
        "    label = None",
        *_chain(10),
        "    count = 0",
        "    if items:",
        "        for item in items:",
        "            if item.ok:",
        "                count += 1",
        "    return label, count",
        "",
    ])


def app_after(version: int) -> str:
    """The counting loop moved to a helper; the redundant ``if items`` guard is gone."""
    return "\n".join([
        f"VERSION = {version}",
        "",
        "",
        "def handle(x, items):",
        "    label = None",
        *_chain(10),
        "    count = count_ok(items)",
        "    return label, count",
        "",
        "",
        "def count_ok(items):",
        "    count = 0",
        "    for item in items:",
        "        if item.ok:",
        "            count += 1",
        "    return count",
        "",
    ])


BEFORE_MESSAGES = ["Initial import", "Bump version", "Fix bug in version string", "Tune constants",
                   "Bump version again", "Fix off-by-one bug", "Update version"]
AFTER_MESSAGES = ["Bump version", "Fix crash on empty items", "Update version", "Tune constants",
                  "Bump version", "Prepare release"]
EXTRACTION_MESSAGE = "Extract counting helper to simplify handle"

# CCP windows on app.py around the extraction commit
BEFORE_WINDOW = (2, 7)  # corrective, total
AFTER_WINDOW = (1, 6)
EXPECTED_CCP_DIFF = 100.0 * (1 / 6 - 2 / 7)


def extraction_history() -> list[Commit]:
    """19 commits; the one at index 9 extracts ``count_ok`` from ``handle``."""
    history: list[Commit] = []
    version = 0
    util_bumps = iter(range(1, 100))

    def util_commit() -> Commit:
        n = next(util_bumps)
        return Commit(f"Document util {n}", {"util.py": f"def helper():\n    return {n}\n"})

    history.append(Commit(BEFORE_MESSAGES[0], {"app.py": app_before(0), "util.py": "def helper():\n    return 0\n"}))
    for message in BEFORE_MESSAGES[1:]:
        version += 1
        history.append(Commit(message, {"app.py": app_before(version)}))
        if version in (2, 4):
            history.append(util_commit())
    history.append(Commit(EXTRACTION_MESSAGE, {"app.py": app_after(version)}))
    for k, message in enumerate(AFTER_MESSAGES):
        version += 1
        history.append(Commit(message, {"app.py": app_after(version)}))
        if k in (1, 3, 5):
            history.append(util_commit())
    return history


def build_extraction_repo(path: Path) -> list[str]:
    return build_repo(path, extraction_history())
