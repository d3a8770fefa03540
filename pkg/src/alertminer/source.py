"""Structural model of a Python source file.

The stdlib ``ast`` and ``tokenize`` modules do the parsing; this module
projects their output onto a small, immutable tree that carries exactly the
facets the detectors and metrics read: statements with their arms, the
expressions hanging off each statement, a flat function list and the token
stream. Anything the projection does not model becomes an ``other`` node.

Parsing never raises. A file that fails to decode or parse yields a
``SourceUnit`` with ``parse_ok=False`` and a diagnostic.
"""

from __future__ import annotations

import ast
import io
import keyword
import re
import tokenize
import warnings
from dataclasses import dataclass, field
from typing import Iterator

STATEMENT_KINDS = frozenset({
    "if", "elif-arm", "else-arm", "for", "while", "try", "except-arm",
    "finally-arm", "with", "return", "raise", "pass", "assignment",
    "expression-statement", "import", "import-from", "function-def",
    "class-def", "other",
})
ARM_KINDS = frozenset({"elif-arm", "else-arm", "except-arm", "finally-arm"})
EXPRESSION_KINDS = frozenset({
    "ternary-conditional", "bool-op", "comparison", "literal-constant", "name",
    "call", "parenthesized", "attribute", "other",
})

# token kinds that carry no source text of their own
_LAYOUT_TOKENS = frozenset({tokenize.INDENT, tokenize.DEDENT, tokenize.ENDMARKER})
_LINE_SPLIT = re.compile(r"\r\n|\r|\n")

Position = tuple[int, int]


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int
    end_line: int
    end_column: int

    @property
    def start(self) -> Position:
        return (self.line, self.column)

    @property
    def end(self) -> Position:
        return (self.end_line, self.end_column)


@dataclass(frozen=True)
class ExpressionNode:
    kind: str
    operands: tuple[ExpressionNode, ...]
    is_constant: bool
    span: tuple[Position, Position]
    value: object = None
    """Literal value for ``literal-constant`` nodes."""
    name: str | None = None
    """Identifier for ``name`` nodes, attribute name for ``attribute`` nodes."""
    op: str | None = None
    """``and``/``or`` for bool-ops."""
    guards: int = 0
    """Number of ``if`` clauses owned by a comprehension node."""
    syntax: str = ""
    """Class name of the underlying syntax node."""

    def walk(self) -> Iterator[ExpressionNode]:
        yield self
        for operand in self.operands:
            yield from operand.walk()

    def unwrap(self) -> ExpressionNode:
        node = self
        while node.kind == "parenthesized":
            node = node.operands[0]
        return node


@dataclass(frozen=True)
class StatementNode:
    kind: str
    span: tuple[int, int]
    condition: ExpressionNode | None = None
    children: tuple[StatementNode, ...] = ()
    expressions: tuple[ExpressionNode, ...] = ()
    """Every expression owned directly by this statement (condition included)."""
    value: ExpressionNode | None = None
    """Returned, raised, assigned or evaluated expression."""
    name: str | None = None
    targets: tuple[str, ...] = ()
    names: tuple[str, ...] = ()
    """Imported names, or caught exception names for an except-arm."""
    function: FunctionNode | None = None
    column: int = 0


@dataclass(frozen=True)
class FunctionNode:
    name: str
    qualified_name: str
    span: tuple[int, int]
    parameters: tuple[str, ...]
    body: tuple[StatementNode, ...]
    is_async: bool = False
    start: Position = (0, 0)
    end: Position = (0, 0)
    body_start: Position = (0, 0)
    has_docstring: bool = False
    docstring_span: tuple[Position, Position] | None = None


@dataclass(frozen=True)
class SourceUnit:
    path: str
    lines: tuple[str, ...]
    functions: tuple[FunctionNode, ...] = ()
    module_statements: tuple[StatementNode, ...] = ()
    tokens: tuple[Token, ...] = ()
    parse_ok: bool = False
    parse_error: str | None = None
    code_lines: frozenset[int] = field(default_factory=frozenset)
    """Line numbers covered by at least one significant token."""


def decode_source(data: bytes | str) -> str:
    if isinstance(data, str):
        return data
    try:
        encoding, _ = tokenize.detect_encoding(io.BytesIO(data).readline)
        return data.decode(encoding)
    except (SyntaxError, LookupError, UnicodeDecodeError):
        return data.decode("utf-8", errors="replace")


def split_lines(text: str) -> tuple[str, ...]:
    if not text:
        return ()
    lines = _LINE_SPLIT.split(text)
    if lines and lines[-1] == "":
        lines.pop()
    return tuple(lines)


def parse_source(text: bytes | str, path: str = "<memory>") -> SourceUnit:
    """Parse ``text`` into a :class:`SourceUnit`; failures are returned, not raised."""
    try:
        decoded = decode_source(text)
    except Exception as exc:  # pragma: no cover - decode_source already falls back
        return SourceUnit(path=path, lines=(), parse_error=f"decode failed: {exc}")
    if decoded.startswith("\ufeff"):
        decoded = decoded[1:]
    lines = split_lines(decoded)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            tree = ast.parse(decoded, filename=path)
        tokens = _tokenize(decoded)
        builder = _Builder(lines, tokens)
        statements = builder.block(tree.body, scope=())
    except Exception as exc:  # syntax errors, null bytes, recursion depth, tokenizer errors
        return SourceUnit(path=path, lines=lines, parse_error=f"{type(exc).__name__}: {exc}")
    code_lines = set()
    for tok in tokens:
        if tok.kind not in ("comment", "nl", "newline"):
            code_lines.update(range(tok.line, tok.end_line + 1))
    return SourceUnit(
        path=path,
        lines=lines,
        functions=tuple(builder.functions),
        module_statements=statements,
        tokens=tokens,
        parse_ok=True,
        code_lines=frozenset(code_lines),
    )


def enumerate_functions(unit: SourceUnit) -> list[FunctionNode]:
    """All functions and methods, nested and async included, in source order."""
    if not unit.parse_ok:
        return []
    return list(unit.functions)


def walk_statements(
    statements: tuple[StatementNode, ...], *, into_functions: bool = True, depth: int = 0
) -> Iterator[tuple[StatementNode, int]]:
    """Yield ``(statement, nesting depth)`` pairs in pre-order.

    Depth counts enclosing statements, so module-level (or function-body)
    statements are at ``depth``. Nested function bodies are skipped when
    ``into_functions`` is false.
    """
    for stmt in statements:
        yield stmt, depth
        if stmt.kind == "function-def" and not into_functions:
            continue
        yield from walk_statements(stmt.children, into_functions=into_functions, depth=depth + 1)


def own_statements(fn: FunctionNode) -> Iterator[StatementNode]:
    """Statements of ``fn`` excluding the bodies of nested functions."""
    for stmt, _ in walk_statements(fn.body, into_functions=False):
        yield stmt


def iter_expressions(statements: tuple[StatementNode, ...] | StatementNode) -> Iterator[ExpressionNode]:
    if isinstance(statements, StatementNode):
        statements = (statements,)
    for stmt in statements:
        for expr in stmt.expressions:
            yield from expr.walk()


def _tokenize(text: str) -> tuple[Token, ...]:
    out = []
    for tok in tokenize.generate_tokens(io.StringIO(text).readline):
        if tok.type in _LAYOUT_TOKENS:
            continue
        kind = "op" if tok.type == tokenize.OP else tokenize.tok_name.get(tok.type, "other").lower()
        out.append(Token(kind, tok.string, tok.start[0], tok.start[1], tok.end[0], tok.end[1]))
    return tuple(out)


_CALLABLE_PREV = frozenset({")", "]", "}"})


class _Builder:
    """Projects ``ast`` nodes onto the statement/expression model."""

    def __init__(self, lines: tuple[str, ...], tokens: tuple[Token, ...]):
        self.lines = lines
        self.tokens = tokens
        self.functions: list[FunctionNode | None] = []
        self._seen_names: dict[str, int] = {}
        self._by_start: dict[Position, int] = {}
        self._by_end: dict[Position, int] = {}
        for i, tok in enumerate(tokens):
            if tok.kind in ("nl", "newline", "comment"):
                continue
            self._by_start.setdefault(tok.start, i)
            self._by_end[tok.end] = i
        self._fstring_depth = 0
        self._match: dict[int, int] = {}
        stack: list[int] = []
        for i, tok in enumerate(tokens):
            if tok.kind != "op":
                continue
            if tok.text in "([{":
                stack.append(i)
            elif tok.text in ")]}" and stack:
                self._match[stack.pop()] = i

    # -- positions ---------------------------------------------------------

    def _col(self, lineno: int, byte_col: int) -> int:
        # ast reports UTF-8 byte offsets; tokens use character offsets
        if lineno < 1 or lineno > len(self.lines):
            return byte_col
        line = self.lines[lineno - 1]
        if line.isascii():
            return byte_col
        return len(line.encode("utf-8")[:byte_col].decode("utf-8", errors="ignore"))

    def _start(self, node: ast.AST) -> Position:
        return (node.lineno, self._col(node.lineno, node.col_offset))

    def _end(self, node: ast.AST) -> Position:
        end_line = node.end_lineno or node.lineno
        end_col = node.end_col_offset if node.end_col_offset is not None else node.col_offset
        return (end_line, self._col(end_line, end_col))

    def _starts_with(self, node: ast.AST, word: str) -> bool:
        line = self.lines[node.lineno - 1] if 0 < node.lineno <= len(self.lines) else ""
        col = self._col(node.lineno, node.col_offset)
        return line[col:col + len(word)] == word

    # -- statements --------------------------------------------------------

    def block(self, body: list[ast.stmt], scope: tuple[str, ...]) -> tuple[StatementNode, ...]:
        return tuple(self.statement(node, scope) for node in body)

    def _span(self, node: ast.AST) -> tuple[int, int]:
        return (node.lineno, node.end_lineno or node.lineno)

    def statement(self, node: ast.stmt, scope: tuple[str, ...]) -> StatementNode:
        span = self._span(node)
        col = self._col(node.lineno, node.col_offset)
        if isinstance(node, ast.If):
            return self._if(node, scope)
        if isinstance(node, (ast.For, ast.AsyncFor)):
            target, iterable = self.expr(node.target), self.expr(node.iter)
            children = self.block(node.body, scope) + self._else_arm(node.orelse, scope)
            return StatementNode("for", span, None, children, (target, iterable), column=col)
        if isinstance(node, ast.While):
            test = self.expr(node.test)
            children = self.block(node.body, scope) + self._else_arm(node.orelse, scope)
            return StatementNode("while", span, test, children, (test,), column=col)
        if isinstance(node, ast.Try) or type(node).__name__ == "TryStar":
            children = list(self.block(node.body, scope))
            for handler in node.handlers:
                children.append(self._handler(handler, scope))
            children.extend(self._else_arm(node.orelse, scope))
            if node.finalbody:
                final = self.block(node.finalbody, scope)
                children.append(StatementNode(
                    "finally-arm", (node.finalbody[0].lineno, span[1]), None, final,
                    column=col))
            return StatementNode("try", span, None, tuple(children), column=col)
        if isinstance(node, (ast.With, ast.AsyncWith)):
            exprs = []
            for item in node.items:
                exprs.append(self.expr(item.context_expr))
                if item.optional_vars is not None:
                    exprs.append(self.expr(item.optional_vars))
            return StatementNode("with", span, None, self.block(node.body, scope), tuple(exprs), column=col)
        if isinstance(node, ast.Return):
            value = self.expr(node.value) if node.value is not None else None
            return StatementNode("return", span, expressions=_opt(value), value=value, column=col)
        if isinstance(node, ast.Raise):
            exprs = tuple(self.expr(e) for e in (node.exc, node.cause) if e is not None)
            value = exprs[0] if node.exc is not None else None
            return StatementNode("raise", span, expressions=exprs, value=value, column=col)
        if isinstance(node, ast.Pass):
            return StatementNode("pass", span, column=col)
        if isinstance(node, (ast.Assign, ast.AugAssign, ast.AnnAssign)):
            return self._assignment(node, span, col)
        if isinstance(node, ast.Expr):
            value = self.expr(node.value)
            return StatementNode("expression-statement", span, expressions=(value,), value=value, column=col)
        if isinstance(node, ast.Import):
            names = tuple(alias.name for alias in node.names)
            return StatementNode("import", span, names=names, column=col)
        if isinstance(node, ast.ImportFrom):
            module = "." * node.level + (node.module or "")
            names = tuple(alias.name for alias in node.names)
            return StatementNode("import-from", span, name=module, names=names, column=col)
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            return self._function(node, scope)
        if isinstance(node, ast.ClassDef):
            exprs = tuple(self.expr(e) for e in (*node.decorator_list, *node.bases))
            exprs += tuple(self.expr(k.value) for k in node.keywords)
            children = self.block(node.body, scope + (node.name,))
            return StatementNode("class-def", span, None, children, exprs, name=node.name, column=col)
        return self._other(node, scope, span, col)

    def _if(self, node: ast.If, scope: tuple[str, ...]) -> StatementNode:
        test = self.expr(node.test)
        children = list(self.block(node.body, scope))
        orelse = node.orelse
        while len(orelse) == 1 and isinstance(orelse[0], ast.If) and self._starts_with(orelse[0], "elif"):
            arm = orelse[0]
            arm_test = self.expr(arm.test)
            children.append(StatementNode(
                "elif-arm", self._span(arm), arm_test, self.block(arm.body, scope), (arm_test,),
                column=self._col(arm.lineno, arm.col_offset)))
            orelse = arm.orelse
        children.extend(self._else_arm(orelse, scope))
        return StatementNode("if", self._span(node), test, tuple(children), (test,),
                             column=self._col(node.lineno, node.col_offset))

    def _else_arm(self, orelse: list[ast.stmt], scope: tuple[str, ...]) -> tuple[StatementNode, ...]:
        if not orelse:
            return ()
        span = (orelse[0].lineno, orelse[-1].end_lineno or orelse[-1].lineno)
        return (StatementNode("else-arm", span, None, self.block(orelse, scope),
                              column=self._col(orelse[0].lineno, orelse[0].col_offset)),)

    def _handler(self, handler: ast.ExceptHandler, scope: tuple[str, ...]) -> StatementNode:
        caught = self.expr(handler.type) if handler.type is not None else None
        names: tuple[str, ...] = ()
        if handler.type is not None:
            elts = handler.type.elts if isinstance(handler.type, ast.Tuple) else [handler.type]
            names = tuple(_dotted(e) for e in elts)
        return StatementNode(
            "except-arm", self._span(handler), caught, self.block(handler.body, scope),
            _opt(caught), name=handler.name, names=names,
            column=self._col(handler.lineno, handler.col_offset))

    def _assignment(self, node: ast.stmt, span: tuple[int, int], col: int) -> StatementNode:
        if isinstance(node, ast.Assign):
            targets = node.targets
        else:
            targets = [node.target]
        value = self.expr(node.value) if node.value is not None else None
        exprs = tuple(self.expr(t) for t in targets) + _opt(value)
        if isinstance(node, ast.AnnAssign):
            exprs += (self.expr(node.annotation),)
        return StatementNode(
            "assignment", span, expressions=exprs, value=value,
            targets=tuple(ast.unparse(t) for t in targets), name=type(node).__name__, column=col)

    def _other(self, node: ast.stmt, scope: tuple[str, ...], span: tuple[int, int], col: int) -> StatementNode:
        exprs = tuple(self.expr(e) for e in _child_exprs(node))
        children: list[StatementNode] = []
        # match/case and anything else with nested statement lists
        for case in getattr(node, "cases", ()):
            children.extend(self.block(case.body, scope))
        for attr in ("body", "orelse", "finalbody"):
            sub = getattr(node, attr, None)
            if isinstance(sub, list) and sub and isinstance(sub[0], ast.stmt):
                children.extend(self.block(sub, scope))
        return StatementNode("other", span, None, tuple(children), exprs,
                             name=type(node).__name__, column=col)

    def _function(self, node: ast.FunctionDef | ast.AsyncFunctionDef, scope: tuple[str, ...]) -> StatementNode:
        qualified = ".".join(scope + (node.name,))
        seen = self._seen_names.get(qualified, 0) + 1
        self._seen_names[qualified] = seen
        if seen > 1:
            qualified = f"{qualified}#{seen}"
        slot = len(self.functions)
        self.functions.append(None)

        args = node.args
        params = [a.arg for a in (*args.posonlyargs, *args.args)]
        if args.vararg:
            params.append(args.vararg.arg)
        params.extend(a.arg for a in args.kwonlyargs)
        if args.kwarg:
            params.append(args.kwarg.arg)

        # decorators, defaults and annotations evaluate in the enclosing scope
        outer = [*node.decorator_list, *(d for d in args.defaults), *(d for d in args.kw_defaults if d is not None)]
        if node.returns is not None:
            outer.append(node.returns)
        exprs = tuple(self.expr(e) for e in outer)

        body = self.block(node.body, scope + (node.name,))
        first = node.body[0]
        has_doc = _is_docstring(first)
        doc_span = (self._start(first), self._end(first)) if has_doc else None
        fn = FunctionNode(
            name=node.name,
            qualified_name=qualified,
            span=self._span(node),
            parameters=tuple(params),
            body=body,
            is_async=isinstance(node, ast.AsyncFunctionDef),
            start=self._start(node),
            end=self._end(node),
            body_start=self._start(first),
            has_docstring=has_doc,
            docstring_span=doc_span,
        )
        self.functions[slot] = fn
        return StatementNode("function-def", fn.span, None, body, exprs, name=node.name,
                             function=fn, column=fn.start[1])

    # -- expressions -------------------------------------------------------

    def expr(self, node: ast.expr) -> ExpressionNode:
        if isinstance(node, ast.JoinedStr):
            # positions inside f-strings are unreliable before 3.12
            self._fstring_depth += 1
            try:
                inner = self._expr(node)
            finally:
                self._fstring_depth -= 1
        else:
            inner = self._expr(node)
        if self._fstring_depth:
            return inner
        return self._wrap_parens(inner)

    def _expr(self, node: ast.expr) -> ExpressionNode:
        span = (self._start(node), self._end(node))
        syntax = type(node).__name__
        if isinstance(node, ast.IfExp):
            ops = (self.expr(node.test), self.expr(node.body), self.expr(node.orelse))
            return ExpressionNode("ternary-conditional", ops, all(o.is_constant for o in ops), span, syntax=syntax)
        if isinstance(node, ast.BoolOp):
            op = "and" if isinstance(node.op, ast.And) else "or"
            ops: list[ExpressionNode] = []
            for value in node.values:
                child = self.expr(value)
                bare = child.unwrap()
                if bare.kind == "bool-op" and bare.op == op:
                    ops.extend(bare.operands)
                else:
                    ops.append(child)
            return ExpressionNode("bool-op", tuple(ops), all(o.is_constant for o in ops), span, op=op, syntax=syntax)
        if isinstance(node, ast.Compare):
            ops = (self.expr(node.left), *(self.expr(c) for c in node.comparators))
            return ExpressionNode("comparison", tuple(ops), all(o.is_constant for o in ops), span, syntax=syntax)
        if isinstance(node, ast.Constant):
            return ExpressionNode("literal-constant", (), True, span, value=node.value, syntax=syntax)
        if isinstance(node, ast.Name):
            return ExpressionNode("name", (), False, span, name=node.id, syntax=syntax)
        if isinstance(node, ast.Attribute):
            return ExpressionNode("attribute", (self.expr(node.value),), False, span, name=node.attr, syntax=syntax)
        if isinstance(node, ast.Call):
            ops = tuple(self.expr(e) for e in _child_exprs(node))
            return ExpressionNode("call", ops, False, span, syntax=syntax)
        ops = tuple(self.expr(e) for e in _child_exprs(node))
        guards = sum(len(g.ifs) for g in getattr(node, "generators", ()))
        constant = isinstance(node, _LITERAL_CONTAINERS) and all(o.is_constant for o in ops)
        return ExpressionNode("other", ops, constant, span, guards=guards, syntax=syntax)

    def _wrap_parens(self, inner: ExpressionNode) -> ExpressionNode:
        node = inner
        while True:
            first = self._by_start.get(node.span[0])
            last = self._by_end.get(node.span[1])
            if first is None or last is None or first == 0:
                return node
            opener = first - 1
            tok = self.tokens[opener]
            if tok.kind != "op" or tok.text != "(" or self._match.get(opener) != last + 1:
                return node
            if opener > 0:
                prev = self.tokens[opener - 1]
                if prev.kind in ("string", "number") or (prev.kind == "op" and prev.text in _CALLABLE_PREV):
                    return node
                if prev.kind == "name" and not _is_keyword(prev.text):
                    return node
            closer = self.tokens[last + 1]
            span = (tok.start, closer.end)
            node = ExpressionNode("parenthesized", (node,), node.is_constant, span, syntax="Paren")


_LITERAL_CONTAINERS = (ast.Tuple, ast.List, ast.Set, ast.Dict, ast.UnaryOp, ast.BinOp, ast.JoinedStr)


def _is_keyword(word: str) -> bool:
    return keyword.iskeyword(word) and word not in ("True", "False", "None")


def _child_exprs(node: ast.AST) -> Iterator[ast.expr]:
    for child in ast.iter_child_nodes(node):
        if isinstance(child, ast.expr):
            yield child
        elif isinstance(child, (ast.comprehension, ast.keyword, ast.arguments, ast.arg,
                                ast.withitem, ast.match_case)) or type(child).__name__.startswith("Match"):
            yield from _child_exprs(child)


def _dotted(node: ast.expr) -> str:
    if isinstance(node, ast.Name):
        return node.id
    if isinstance(node, ast.Attribute):
        return f"{_dotted(node.value)}.{node.attr}"
    return ast.unparse(node)


def _is_docstring(node: ast.stmt) -> bool:
    return (isinstance(node, ast.Expr) and isinstance(node.value, ast.Constant)
            and isinstance(node.value.value, str))


def _opt(value: ExpressionNode | None) -> tuple[ExpressionNode, ...]:
    return (value,) if value is not None else ()
