"""Per-function and per-file code metrics.

McCabe decision points
    ``if``, ``elif``, ``for``, ``while``, each ``except`` arm, each ternary
    expression and each comprehension ``if`` clause add one. ``else``,
    ``finally``, ``with`` and ``assert`` add nothing. Boolean operators add
    ``operands - 1`` per operator only with ``extended=True``. Bodies of
    nested functions belong to those functions.

Halstead tokens (function body only, docstring excluded unless ``raw``)
    operators: keywords other than True/False/None, operator and
    punctuation tokens except ``,`` ``;`` ``:`` and closing brackets; an
    opening bracket counts as the bracket pair (``()``, ``[]``, ``{}``).
    operands: identifiers, numbers, strings, True/False/None.
"""

from __future__ import annotations

import keyword
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass

from alertminer.source import FunctionNode, SourceUnit, StatementNode, Token, own_statements

DECISION_STATEMENTS = frozenset({"if", "elif-arm", "for", "while", "except-arm"})

_PAIRS = {"(": "()", "[": "[]", "{": "{}"}
_IGNORED_OPS = frozenset({",", ";", ":", ")", "]", "}"})
_LITERAL_NAMES = frozenset({"True", "False", "None"})


@dataclass(frozen=True)
class HalsteadMeasures:
    n1: int
    n2: int
    N1: int
    N2: int
    vocabulary: int
    length: int
    volume: float
    difficulty: float
    effort: float

    @classmethod
    def from_counts(cls, n1: int, n2: int, N1: int, N2: int) -> HalsteadMeasures:
        vocabulary = n1 + n2
        length = N1 + N2
        # a one-symbol vocabulary would give log2(1) = 0; floor it at 2 so
        # that any non-empty body has positive volume
        volume = length * math.log2(max(vocabulary, 2)) if length else 0.0
        difficulty = (n1 / 2) * (N2 / n2) if n2 else 0.0
        return cls(n1, n2, N1, N2, vocabulary, length, volume, difficulty, difficulty * volume)


@dataclass(frozen=True)
class FunctionMetrics:
    qualified_name: str
    mccabe: int
    loc: int
    halstead: HalsteadMeasures


@dataclass(frozen=True)
class FileMetrics:
    mccabe_max: int
    mccabe_sum: int
    loc: int
    function_count: int
    halstead_volume: float = 0.0
    halstead_effort: float = 0.0


def mccabe(fn: FunctionNode, *, extended: bool = False) -> int:
    """Cyclomatic complexity of ``fn``: one plus its decision points."""
    return 1 + decision_points(fn.body, extended=extended)


def decision_points(statements: tuple[StatementNode, ...], *, extended: bool = False) -> int:
    total = 0
    for stmt in _own(statements):
        if stmt.kind in DECISION_STATEMENTS:
            total += 1
        for expr in stmt.expressions:
            for node in expr.walk():
                if node.kind == "ternary-conditional":
                    total += 1
                total += node.guards
                if extended and node.kind == "bool-op":
                    total += len(node.operands) - 1
    return total


def _own(statements: tuple[StatementNode, ...]):
    stack = list(reversed(statements))
    while stack:
        stmt = stack.pop()
        yield stmt
        if stmt.kind != "function-def":
            stack.extend(reversed(stmt.children))


def loc(target: SourceUnit | FunctionNode, unit: SourceUnit | None = None, *, raw: bool = False) -> int:
    """Lines of code, skipping blank and comment-only lines unless ``raw``.

    For a function, pass the owning unit as well; the count covers the
    function's span from its ``def`` line to its last line.
    """
    if isinstance(target, SourceUnit):
        if raw:
            return len(target.lines)
        if target.parse_ok:
            return len(target.code_lines)
        return sum(1 for line in target.lines if _is_code_line(line))
    if unit is None:
        raise TypeError("loc(function) needs the owning SourceUnit")
    first, last = target.span
    if raw:
        return last - first + 1
    return sum(1 for n in range(first, last + 1) if n in unit.code_lines)


def _is_code_line(line: str) -> bool:
    stripped = line.strip()
    return bool(stripped) and not stripped.startswith("#")


def halstead(fn: FunctionNode, unit: SourceUnit, *, raw: bool = False,
             _starts: list | None = None) -> HalsteadMeasures:
    return halstead_of_tokens(function_tokens(fn, unit, raw=raw, _starts=_starts))


def halstead_of_tokens(tokens) -> HalsteadMeasures:
    operators: dict[str, int] = {}
    operands: dict[str, int] = {}
    for tok in tokens:
        _classify(tok, operators, operands)
    return HalsteadMeasures.from_counts(
        len(operators), len(operands), sum(operators.values()), sum(operands.values()))


def function_tokens(fn: FunctionNode, unit: SourceUnit, *, raw: bool = False,
                    _starts: list | None = None) -> list[Token]:
    """Tokens of ``fn``'s own body: nested function definitions and, unless
    ``raw``, the docstring are cut out."""
    excluded = []
    if fn.docstring_span is not None and not raw:
        excluded.append(fn.docstring_span)
    for stmt in own_statements(fn):
        if stmt.kind == "function-def" and stmt.function is not None:
            nested = stmt.function
            excluded.append((nested.start, nested.end))
    starts = _starts if _starts is not None else [t.start for t in unit.tokens]
    lo, hi = bisect_left(starts, fn.body_start), bisect_right(starts, fn.end)
    out = []
    for tok in unit.tokens[lo:hi]:
        if tok.end > fn.end:
            continue
        if any(a <= tok.start and tok.end <= b for a, b in excluded):
            continue
        out.append(tok)
    return out


def _classify(tok: Token, operators: dict[str, int], operands: dict[str, int]) -> None:
    if tok.kind == "name":
        if tok.text in _LITERAL_NAMES:
            bucket, key = operands, tok.text
        elif keyword.iskeyword(tok.text):
            bucket, key = operators, tok.text
        else:
            bucket, key = operands, tok.text
    elif tok.kind in ("number", "string") or tok.kind.startswith("fstring"):
        if tok.kind in ("fstring_middle", "fstring_end"):
            return
        bucket, key = operands, tok.text
    elif tok.kind == "op":
        if tok.text in _IGNORED_OPS:
            return
        bucket, key = operators, _PAIRS.get(tok.text, tok.text)
    else:
        return
    bucket[key] = bucket.get(key, 0) + 1


def function_metrics(fn: FunctionNode, unit: SourceUnit) -> FunctionMetrics:
    return FunctionMetrics(fn.qualified_name, mccabe(fn), loc(fn, unit), halstead(fn, unit))


def file_metrics(unit: SourceUnit, *, with_halstead: bool = True) -> FileMetrics:
    """Aggregate per-function McCabe into max and sum, plus file LOC."""
    if not unit.parse_ok:
        return FileMetrics(0, 0, loc(unit), 0)
    scores = [mccabe(fn) for fn in unit.functions]
    volume = effort = 0.0
    if with_halstead:
        starts = [t.start for t in unit.tokens]
        for fn in unit.functions:
            measures = halstead(fn, unit, _starts=starts)
            volume += measures.volume
            effort += measures.effort
    return FileMetrics(
        mccabe_max=max(scores, default=0),
        mccabe_sum=sum(scores),
        loc=loc(unit),
        function_count=len(scores),
        halstead_volume=volume,
        halstead_effort=effort,
    )
