"""Detectors for the 17 alert kinds.

Each detector reads a parsed :class:`~alertminer.source.SourceUnit` and
returns :class:`AlertInstance` objects. Threshold detectors fire strictly
above their threshold. Branch counting for ``too-many-branches`` uses
statement arms (``if``/``elif``/``for``/``while``/``except``); it is close
to, but not the same as, the McCabe decision-point set in
:mod:`alertminer.metrics`, which also counts ternaries and comprehension
guards.
"""

from __future__ import annotations

from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass, fields
from enum import Enum
from typing import Callable, Iterator

from alertminer.source import (
    ARM_KINDS,
    ExpressionNode,
    FunctionNode,
    SourceUnit,
    StatementNode,
    own_statements,
)


class AlertKind(str, Enum):
    BROAD_EXCEPTION_CAUGHT = "broad-exception-caught"
    COMPARISON_OF_CONSTANTS = "comparison-of-constants"
    LINE_TOO_LONG = "line-too-long"
    POINTLESS_STATEMENT = "pointless-statement"
    SIMPLIFIABLE_IF_EXPRESSION = "simplifiable-if-expression"
    SIMPLIFIABLE_IF_STATEMENT = "simplifiable-if-statement"
    SUPERFLUOUS_PARENS = "superfluous-parens"
    TOO_MANY_BOOLEAN_EXPRESSIONS = "too-many-boolean-expressions"
    TOO_MANY_BRANCHES = "too-many-branches"
    TOO_MANY_LINES = "too-many-lines"
    TOO_MANY_NESTED_BLOCKS = "too-many-nested-blocks"
    TOO_MANY_RETURN_STATEMENTS = "too-many-return-statements"
    TOO_MANY_STATEMENTS = "too-many-statements"
    TRY_EXCEPT_RAISE = "try-except-raise"
    UNNECESSARY_PASS = "unnecessary-pass"
    USING_CONSTANT_TEST = "using-constant-test"
    WILDCARD_IMPORT = "wildcard-import"

    def __str__(self) -> str:
        return self.value


FUNCTION_SCOPED = frozenset({
    AlertKind.TOO_MANY_BRANCHES,
    AlertKind.TOO_MANY_NESTED_BLOCKS,
    AlertKind.TOO_MANY_RETURN_STATEMENTS,
    AlertKind.TOO_MANY_STATEMENTS,
})
COMPLEXITY_KINDS = FUNCTION_SCOPED

BRANCH_KINDS = frozenset({"if", "elif-arm", "for", "while", "except-arm"})
BLOCK_KINDS = frozenset({"if", "for", "while", "try", "with"})
SUPERFLUOUS_PARENS_KEYWORDS = frozenset({"if", "while", "elif", "return", "assert", "not", "del", "yield"})


@dataclass(frozen=True)
class AlertInstance:
    kind: AlertKind
    path: str
    line: int
    function: str | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "path": self.path, "line": self.line,
                "function": self.function, "detail": self.detail}

    @classmethod
    def from_dict(cls, data: dict) -> AlertInstance:
        return cls(AlertKind(data["kind"]), data["path"], int(data["line"]),
                   data.get("function"), data.get("detail", ""))


@dataclass(frozen=True)
class DetectorConfig:
    max_branches: int = 12
    max_statements: int = 50
    max_returns: int = 6
    max_nested_blocks: int = 5
    max_bool_expr: int = 5
    max_line_length: int = 100
    max_module_lines: int = 1000

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ValueError(f"{f.name} must be an integer >= 1, got {value!r}")


def detect_all(unit: SourceUnit, cfg: DetectorConfig | None = None) -> list[AlertInstance]:
    """Run every detector; unparsed units yield no alerts."""
    if not unit.parse_ok:
        return []
    cfg = cfg or DetectorConfig()
    ctx = _Context(unit)
    alerts: list[AlertInstance] = []
    for detector in DETECTORS.values():
        alerts.extend(detector(ctx, cfg))
    alerts.sort(key=lambda a: (a.line, a.kind.value, a.function or "", a.detail))
    return alerts


def count_by_kind(alerts: list[AlertInstance]) -> dict[AlertKind, int]:
    counts = dict.fromkeys(AlertKind, 0)
    counts.update(Counter(a.kind for a in alerts))
    return counts


class _Context:
    """Per-unit lookups shared by the detectors."""

    def __init__(self, unit: SourceUnit):
        self.unit = unit
        self.path = unit.path
        # (statement, enclosing function, enclosing block)
        self.statements: list[tuple[StatementNode, FunctionNode | None, tuple[StatementNode, ...]]] = []
        self.blocks: list[tuple[tuple[StatementNode, ...], FunctionNode | None]] = []
        self._collect(unit.module_statements, None)
        spans = sorted(((fn.span[0], -fn.span[1], i) for i, fn in enumerate(unit.functions)))
        self._fn_starts = [s[0] for s in spans]
        self._fn_order = [unit.functions[s[2]] for s in spans]

    def _collect(self, block: tuple[StatementNode, ...], fn: FunctionNode | None) -> None:
        self.blocks.append((block, fn))
        for stmt in block:
            self.statements.append((stmt, fn, block))
            inner = stmt.function if stmt.kind == "function-def" else fn
            body = tuple(c for c in stmt.children if c.kind not in ARM_KINDS)
            if stmt.kind == "other":
                # e.g. match/case: the flattened case bodies are not one block
                for child in body:
                    self._collect((child,), inner)
            elif body or stmt.kind in ("function-def", "class-def"):
                self._collect(body, inner)
            for arm in stmt.children:
                if arm.kind in ARM_KINDS:
                    self.statements.append((arm, fn, stmt.children))
                    self._collect(arm.children, fn)

    def function_at(self, line: int) -> str | None:
        idx = bisect_right(self._fn_starts, line)
        best = None
        for fn in self._fn_order[:idx]:
            if fn.span[0] <= line <= fn.span[1]:
                best = fn
        return best.qualified_name if best else None

    def alert(self, kind: AlertKind, line: int, fn: FunctionNode | str | None = None, detail: str = "") -> AlertInstance:
        if isinstance(fn, FunctionNode):
            fn = fn.qualified_name
        return AlertInstance(kind, self.path, line, fn, detail)

    def expressions(self) -> Iterator[tuple[ExpressionNode, StatementNode, FunctionNode | None]]:
        for stmt, fn, _ in self.statements:
            for expr in stmt.expressions:
                for node in expr.walk():
                    yield node, stmt, fn


def _qual(fn: FunctionNode | None) -> str | None:
    return fn.qualified_name if fn else None


def _is_bool_literal(expr: ExpressionNode | None) -> bool:
    if expr is None:
        return False
    bare = expr.unwrap()
    return bare.kind == "literal-constant" and isinstance(bare.value, bool)


# -- line/module detectors ------------------------------------------------

def _line_too_long(ctx: _Context, cfg: DetectorConfig) -> list[AlertInstance]:
    return [
        ctx.alert(AlertKind.LINE_TOO_LONG, n, ctx.function_at(n), f"{len(line)}/{cfg.max_line_length}")
        for n, line in enumerate(ctx.unit.lines, start=1)
        if len(line) > cfg.max_line_length
    ]


def _too_many_lines(ctx: _Context, cfg: DetectorConfig) -> list[AlertInstance]:
    count = len(ctx.unit.lines)
    if count > cfg.max_module_lines:
        return [ctx.alert(AlertKind.TOO_MANY_LINES, 1, None, f"{count}/{cfg.max_module_lines}")]
    return []


def _wildcard_import(ctx: _Context, cfg: DetectorConfig) -> list[AlertInstance]:
    return [
        ctx.alert(AlertKind.WILDCARD_IMPORT, stmt.span[0], _qual(fn), stmt.name or "")
        for stmt, fn, _ in ctx.statements
        if stmt.kind == "import-from" and "*" in stmt.names
    ]


def _superfluous_parens(ctx: _Context, cfg: DetectorConfig) -> list[AlertInstance]:
    tokens = [t for t in ctx.unit.tokens if t.kind not in ("nl", "comment")]
    found = []
    for i, tok in enumerate(tokens[:-1]):
        if tok.kind != "name" or tok.text not in SUPERFLUOUS_PARENS_KEYWORDS:
            continue
        opener = tokens[i + 1]
        if opener.kind != "op" or opener.text != "(":
            continue
        close = _removable_group(tokens, i + 1, tok.text)
        if close is None:
            continue
        found.append(ctx.alert(AlertKind.SUPERFLUOUS_PARENS, tok.line, ctx.function_at(tok.line),
                               f"after '{tok.text}'"))
    return found


_GROUP_FOLLOWERS = frozenset({":", ")", "]", "}", ";"})


def _removable_group(tokens, start: int, keyword: str) -> int | None:
    depth = 0
    found_and_or = False
    for j in range(start, len(tokens)):
        tok = tokens[j]
        if tok.kind == "op" and tok.text in "([{":
            depth += 1
        elif tok.kind == "op" and tok.text in ")]}":
            depth -= 1
            if depth == 0:
                break
        elif depth == 1:
            if tok.kind == "op" and tok.text in (",", ":="):
                return None
            if tok.kind == "name" and tok.text in ("yield", "for", "lambda"):
                return None
            if tok.kind == "name" and tok.text in ("and", "or"):
                found_and_or = True
        if tok.kind == "newline":
            return None
    else:
        return None
    if j == start + 1:
        return None  # empty tuple
    if tokens[start].line != tokens[j].line:
        return None  # parentheses carry a line continuation
    after = tokens[j + 1] if j + 1 < len(tokens) else None
    if after is not None and not (after.kind == "newline" or (after.kind == "op" and after.text in _GROUP_FOLLOWERS)):
        return None
    if found_and_or and keyword not in ("return", "yield"):
        return None
    return j


# -- statement detectors --------------------------------------------------

def _broad_exception_caught(ctx: _Context, cfg: DetectorConfig) -> list[AlertInstance]:
    return [
        ctx.alert(AlertKind.BROAD_EXCEPTION_CAUGHT, stmt.span[0], _qual(fn), "Exception")
        for stmt, fn, _ in ctx.statements
        if stmt.kind == "except-arm" and ({"Exception", "builtins.Exception"} & set(stmt.names))
    ]


def _try_except_raise(ctx: _Context, cfg: DetectorConfig) -> list[AlertInstance]:
    out = []
    for stmt, fn, _ in ctx.statements:
        if stmt.kind != "except-arm" or len(stmt.children) != 1:
            continue
        only = stmt.children[0]
        if only.kind == "raise" and not only.expressions:
            out.append(ctx.alert(AlertKind.TRY_EXCEPT_RAISE, stmt.span[0], _qual(fn)))
    return out


def _unnecessary_pass(ctx: _Context, cfg: DetectorConfig) -> list[AlertInstance]:
    out = []
    for block, fn in ctx.blocks:
        if len(block) < 2:
            continue
        for stmt in block:
            if stmt.kind == "pass":
                out.append(ctx.alert(AlertKind.UNNECESSARY_PASS, stmt.span[0], _qual(fn)))
    return out


_NOT_POINTLESS = frozenset({"Yield", "YieldFrom", "Await", "NamedExpr"})


def _pointless_statement(ctx: _Context, cfg: DetectorConfig) -> list[AlertInstance]:
    out = []
    for stmt, fn, _ in ctx.statements:
        if stmt.kind != "expression-statement" or stmt.value is None:
            continue
        value = stmt.value.unwrap()
        if value.kind == "call" or value.syntax in _NOT_POINTLESS:
            continue
        # string statements (docstrings included) and `...` placeholders
        if value.kind == "literal-constant" and (isinstance(value.value, str) or value.value is Ellipsis):
            continue
        out.append(ctx.alert(AlertKind.POINTLESS_STATEMENT, stmt.span[0], _qual(fn)))
    return out


def _simplifiable_if_statement(ctx: _Context, cfg: DetectorConfig) -> list[AlertInstance]:
    out = []
    for stmt, fn, _ in ctx.statements:
        if stmt.kind != "if":
            continue
        arms = [c for c in stmt.children if c.kind in ("elif-arm", "else-arm")]
        if not arms or arms[-1].kind != "else-arm":
            continue
        last_conditional = arms[-2] if len(arms) > 1 else stmt
        if last_conditional is stmt:
            body = tuple(c for c in stmt.children if c.kind not in ARM_KINDS)
        else:
            body = last_conditional.children
        orelse = arms[-1].children
        if len(body) != 1 or len(orelse) != 1:
            continue
        a, b = body[0], orelse[0]
        simplifiable = False
        if a.kind == b.kind == "return":
            simplifiable = _is_bool_literal(a.value) and _is_bool_literal(b.value)
        elif a.kind == b.kind == "assignment" and a.name == b.name == "Assign":
            simplifiable = (len(a.targets) == 1 and a.targets == b.targets
                            and _is_bool_literal(a.value) and _is_bool_literal(b.value))
        if simplifiable:
            out.append(ctx.alert(AlertKind.SIMPLIFIABLE_IF_STATEMENT, last_conditional.span[0], _qual(fn)))
    return out


def _conditions(ctx: _Context) -> Iterator[tuple[ExpressionNode, StatementNode, FunctionNode | None]]:
    for stmt, fn, _ in ctx.statements:
        if stmt.kind in ("if", "elif-arm") and stmt.condition is not None:
            yield stmt.condition, stmt, fn


def _too_many_boolean_expressions(ctx: _Context, cfg: DetectorConfig) -> list[AlertInstance]:
    out = []
    for cond, stmt, fn in _conditions(ctx):
        if cond.unwrap().kind != "bool-op":
            continue
        terms = boolean_terms(cond)
        if terms > cfg.max_bool_expr:
            out.append(ctx.alert(AlertKind.TOO_MANY_BOOLEAN_EXPRESSIONS, stmt.span[0], _qual(fn),
                                 f"{terms}/{cfg.max_bool_expr}"))
    return out


def boolean_terms(expr: ExpressionNode) -> int:
    """Leaves of the boolean-operator tree rooted at ``expr``."""
    bare = expr.unwrap()
    if bare.kind != "bool-op":
        return 1
    return sum(boolean_terms(op) for op in bare.operands)


def _using_constant_test(ctx: _Context, cfg: DetectorConfig) -> list[AlertInstance]:
    out = []
    for cond, stmt, fn in _conditions(ctx):
        if cond.unwrap().is_constant:
            out.append(ctx.alert(AlertKind.USING_CONSTANT_TEST, stmt.span[0], _qual(fn)))
    for node, stmt, fn in ctx.expressions():
        if node.kind == "ternary-conditional" and node.operands[0].unwrap().is_constant:
            out.append(ctx.alert(AlertKind.USING_CONSTANT_TEST, node.span[0][0], _qual(fn)))
    return out


def _comparison_of_constants(ctx: _Context, cfg: DetectorConfig) -> list[AlertInstance]:
    return [
        ctx.alert(AlertKind.COMPARISON_OF_CONSTANTS, node.span[0][0], _qual(fn))
        for node, stmt, fn in ctx.expressions()
        if node.kind == "comparison" and all(op.is_constant for op in node.operands)
    ]


def _simplifiable_if_expression(ctx: _Context, cfg: DetectorConfig) -> list[AlertInstance]:
    out = []
    for node, stmt, fn in ctx.expressions():
        if node.kind != "ternary-conditional":
            continue
        body, orelse = node.operands[1].unwrap(), node.operands[2].unwrap()
        if _is_bool_literal(body) and _is_bool_literal(orelse) and body.value != orelse.value:
            out.append(ctx.alert(AlertKind.SIMPLIFIABLE_IF_EXPRESSION, node.span[0][0], _qual(fn)))
    return out


# -- function detectors ---------------------------------------------------

def branch_count(fn: FunctionNode) -> int:
    return sum(1 for stmt in own_statements(fn) if stmt.kind in BRANCH_KINDS)


def return_count(fn: FunctionNode) -> int:
    return sum(1 for stmt in own_statements(fn) if stmt.kind == "return")


def statement_count(fn: FunctionNode) -> int:
    """Concrete statements in ``fn``; arms are structure, not statements, and a
    nested ``def`` counts once."""
    return sum(1 for stmt in own_statements(fn) if stmt.kind not in ARM_KINDS)


def nesting_depth(statements: tuple[StatementNode, ...], level: int = 0) -> int:
    """Deepest block nesting below ``statements`` (function body is level 0)."""
    deepest = level
    for stmt in statements:
        if stmt.kind in ("function-def", "class-def"):
            continue
        inner = level + 1 if stmt.kind in BLOCK_KINDS else level
        deepest = max(deepest, inner)
        for child in stmt.children:
            if child.kind in ARM_KINDS:
                deepest = max(deepest, nesting_depth(child.children, inner))
            else:
                deepest = max(deepest, nesting_depth((child,), inner))
    return deepest


def _function_alerts(ctx: _Context, cfg: DetectorConfig) -> list[AlertInstance]:
    out = []
    for fn in ctx.unit.functions:
        line = fn.span[0]
        branches = branch_count(fn)
        if branches > cfg.max_branches:
            out.append(ctx.alert(AlertKind.TOO_MANY_BRANCHES, line, fn, f"{branches}/{cfg.max_branches}"))
        returns = return_count(fn)
        if returns > cfg.max_returns:
            out.append(ctx.alert(AlertKind.TOO_MANY_RETURN_STATEMENTS, line, fn, f"{returns}/{cfg.max_returns}"))
        statements = statement_count(fn)
        if statements > cfg.max_statements:
            out.append(ctx.alert(AlertKind.TOO_MANY_STATEMENTS, line, fn, f"{statements}/{cfg.max_statements}"))
        for stmt in fn.body:
            depth = nesting_depth((stmt,))
            if depth > cfg.max_nested_blocks:
                out.append(ctx.alert(AlertKind.TOO_MANY_NESTED_BLOCKS, stmt.span[0], fn,
                                     f"{depth}/{cfg.max_nested_blocks}"))
                break
    return out


DETECTORS: dict[str, Callable[[_Context, DetectorConfig], list[AlertInstance]]] = {
    "broad-exception-caught": _broad_exception_caught,
    "comparison-of-constants": _comparison_of_constants,
    "line-too-long": _line_too_long,
    "pointless-statement": _pointless_statement,
    "simplifiable-if-expression": _simplifiable_if_expression,
    "simplifiable-if-statement": _simplifiable_if_statement,
    "superfluous-parens": _superfluous_parens,
    "too-many-boolean-expressions": _too_many_boolean_expressions,
    "function-scoped": _function_alerts,
    "too-many-lines": _too_many_lines,
    "try-except-raise": _try_except_raise,
    "unnecessary-pass": _unnecessary_pass,
    "using-constant-test": _using_constant_test,
    "wildcard-import": _wildcard_import,
}
