"""Typed, lossless syntax tree for LaTeX sources."""

from __future__ import annotations

import enum
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Union

from .source import SourceDocument, Span


class NodeKind(str, enum.Enum):
    COMMAND = "Command"
    ENVIRONMENT = "Environment"
    GROUP = "Group"
    MATH_INLINE = "MathInline"
    MATH_DISPLAY = "MathDisplay"
    TEXT = "Text"
    COMMENT = "Comment"
    PACKAGE_DECL = "PackageDecl"
    DOCUMENT_CLASS_DECL = "DocumentClassDecl"
    CITE_REF = "CiteRef"
    LABEL_REF = "LabelRef"
    ERROR = "Error"


class ErrorKind(str, enum.Enum):
    UNCLOSED_ENVIRONMENT = "UnclosedEnvironment"
    UNMATCHED_END = "UnmatchedEnd"
    UNCLOSED_GROUP = "UnclosedGroup"
    UNMATCHED_BRACE = "UnmatchedBrace"
    UNTERMINATED_MATH = "UnterminatedMath"
    UNMATCHED_MATH_DELIMITER = "UnmatchedMathDelimiter"
    STRAY_DOLLAR = "StrayDollar"


Part = Union[str, "AstNode"]

MATH_ENVIRONMENTS = frozenset(
    name + star
    for name in (
        "equation", "align", "gather", "multline", "flalign", "alignat",
        "eqnarray", "displaymath", "math", "dmath",
    )
    for star in ("", "*")
)

VERBATIM_ENVIRONMENTS = frozenset(
    {"verbatim", "verbatim*", "Verbatim", "lstlisting", "minted", "comment", "filecontents", "filecontents*"}
)


@dataclass(frozen=True)
class AstNode:
    kind: NodeKind
    span: Span
    name: str | None = None
    parts: tuple[Part, ...] = ()
    error: ErrorKind | None = None
    # command that produced a CiteRef/LabelRef/PackageDecl node
    macro: str | None = None
    # "m" or "o" for argument groups
    arg: str | None = None

    @cached_property
    def children(self) -> tuple[AstNode, ...]:
        return tuple(p for p in self.parts if not isinstance(p, str))

    @property
    def args(self) -> tuple[AstNode, ...]:
        return tuple(c for c in self.children if c.arg is not None)

    @property
    def is_error(self) -> bool:
        return self.error is not None

    @property
    def keys(self) -> list[str]:
        """Comma separated keys of a CiteRef/LabelRef/PackageDecl node."""
        if not self.name:
            return []
        return [k.strip() for k in self.name.split(",") if k.strip()]

    def inner_text(self) -> str:
        """Rendered text between the delimiters of an argument group."""
        if self.kind is NodeKind.GROUP or (self.kind is NodeKind.ERROR and self.arg):
            body = self.parts[1:-1] if self.error is None else self.parts[1:]
            return "".join(render_node(p) if not isinstance(p, str) else p for p in body)
        return render_node(self)

    @property
    def begin(self) -> AstNode | None:
        """The ``\\begin{...}`` command of an environment-like node."""
        children = self.children
        if children and children[0].kind is NodeKind.COMMAND and children[0].name == "begin":
            return children[0]
        return None

    def walk(self) -> Iterator[AstNode]:
        """Pre-order traversal including this node."""
        stack: list[AstNode] = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def structure(self) -> tuple:
        """Offset-free structural fingerprint used for re-parse comparisons."""
        return (
            self.kind.value,
            self.name,
            self.error.value if self.error else None,
            self.arg,
            tuple(p if isinstance(p, str) else p.structure() for p in self.parts),
        )


def render_node(node: AstNode) -> str:
    out: list[str] = []
    stack: list[Part] = [node]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
        else:
            stack.extend(reversed(item.parts))
    return "".join(out)


class PackageUse(NamedTuple):
    name: str
    options: str | None
    span: Span


@dataclass(frozen=True)
class Ast:
    root: AstNode
    source: SourceDocument
    macros: Mapping[str, int] = field(default_factory=dict)
    environments: frozenset[str] = frozenset()

    @cached_property
    def nodes(self) -> tuple[AstNode, ...]:
        return tuple(self.root.walk())

    @cached_property
    def document_env(self) -> AstNode | None:
        for child in self.root.children:
            if child.kind in (NodeKind.ENVIRONMENT, NodeKind.ERROR) and child.name == "document" and child.begin:
                return child
        return None

    @cached_property
    def preamble(self) -> tuple[AstNode, ...]:
        out = []
        for child in self.root.children:
            if child is self.document_env:
                break
            out.append(child)
        return tuple(out)

    @cached_property
    def preamble_end(self) -> int:
        doc = self.document_env
        return doc.span.start if doc else len(self.source.text)

    @cached_property
    def package_decls(self) -> tuple[AstNode, ...]:
        return tuple(n for n in self.nodes if n.kind is NodeKind.PACKAGE_DECL)

    @cached_property
    def packages(self) -> tuple[PackageUse, ...]:
        out = []
        for node in self.package_decls:
            options = None
            for a in node.args:
                if a.arg == "o":
                    options = a.inner_text().strip()
            for key in node.keys:
                out.append(PackageUse(key, options, node.span))
        return tuple(out)

    @cached_property
    def document_class(self) -> str | None:
        for n in self.nodes:
            if n.kind is NodeKind.DOCUMENT_CLASS_DECL:
                return n.name
        return None

    @cached_property
    def recovery_count(self) -> int:
        return sum(1 for n in self.nodes if n.error is not None)

    @cached_property
    def error_nodes(self) -> tuple[AstNode, ...]:
        return tuple(n for n in self.nodes if n.error is not None)

    @cached_property
    def paths(self) -> tuple[tuple[AstNode, ...], ...]:
        """Root-first path to every node, in document (pre-)order."""
        out: list[tuple[AstNode, ...]] = []
        stack: list[tuple[AstNode, ...]] = [(self.root,)]
        while stack:
            path = stack.pop()
            out.append(path)
            stack.extend(path + (c,) for c in reversed(path[-1].children))
        return tuple(out)

    @cached_property
    def paths_by_line(self) -> dict[int, list[tuple[AstNode, ...]]]:
        """Start line -> paths of nodes starting on that line."""
        index: dict[int, list[tuple[AstNode, ...]]] = {}
        for path in self.paths[1:]:
            index.setdefault(path[-1].span.line, []).append(path)
        return index

    def paths_between(self, first: int, last: int) -> list[tuple[AstNode, ...]]:
        """Paths of nodes whose span touches any line in ``[first, last]``."""
        src = self.source
        out = []
        for path in self.paths[1:]:
            node = path[-1]
            lo = node.span.line
            hi = src.line_of(max(node.span.end - 1, node.span.start))
            if lo <= last and hi >= first:
                out.append(path)
        return out

    @cached_property
    def _line_index(self) -> dict[int, list[tuple[AstNode, ...]]]:
        """Line -> paths of the deepest nodes intersecting that line."""
        src = self.source
        index: dict[int, list[tuple[AstNode, ...]]] = {}

        def lines_of(span: Span) -> range:
            first = src.line_of(span.start)
            last = src.line_of(span.end - 1) if span.end > span.start else first
            return range(first, last + 1)

        def visit(node: AstNode, path: tuple[AstNode, ...]) -> set[int]:
            path = path + (node,)
            covered: set[int] = set()
            for child in node.children:
                covered |= visit(child, path)
            own = set(lines_of(node.span)) if node is not self.root else set()
            for line in own - covered:
                index.setdefault(line, []).append(path)
            return covered | own

        visit(self.root, ())
        return index

    def locate(self, line: int) -> list[tuple[AstNode, ...]]:
        """Paths (root first) to the deepest nodes touching ``line``, innermost first."""
        paths = self._line_index.get(line, [])
        return sorted(paths, key=lambda p: (-len(p), p[-1].span.start))

    def path_to(self, offset: int) -> tuple[AstNode, ...]:
        """Path to the deepest node whose span contains ``offset``."""
        path = [self.root]
        node = self.root
        while True:
            for child in node.children:
                if child.span.start <= offset < child.span.end:
                    path.append(child)
                    node = child
                    break
            else:
                return tuple(path)


def render(ast: Ast) -> str:
    return render_node(ast.root)


def locate(ast: Ast, line: int) -> list[tuple[AstNode, ...]]:
    return ast.locate(line)
