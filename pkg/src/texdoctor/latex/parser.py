"""Error-recovering LaTeX parser.

``parse`` is total: any input yields a tree whose leaves concatenate back to the
input. Malformed regions become ``NodeKind.ERROR`` nodes.
"""

from __future__ import annotations

import re
from typing import NamedTuple

from .nodes import (
    MATH_ENVIRONMENTS,
    VERBATIM_ENVIRONMENTS,
    Ast,
    AstNode,
    ErrorKind,
    NodeKind,
    Part,
)
from .source import SourceDocument

MAX_DEPTH = 120

_TOKEN = re.compile(
    r"""
     (?P<cs>\\[A-Za-z@]+)
    |(?P<csym>\\.)
    |(?P<bs>\\)
    |(?P<lbrace>\{)
    |(?P<rbrace>\})
    |(?P<lbrack>\[)
    |(?P<rbrack>\])
    |(?P<dollar>\$)
    |(?P<comment>%[^\n]*)
    |(?P<newline>\n)
    |(?P<text>[^\\{}\[\]$%\n]+)
    """,
    re.X | re.S,
)
_PAR_AHEAD = re.compile(r"[ \t\f\v\r]*\n")
_HSPACE = re.compile(r"[ \t]*")
_ARG_SPACE = re.compile(r"[ \t]*(?:\r?\n[ \t]*)?")
_NAME = re.compile(r"\{([^{}\\\n]*)\}")


class Token(NamedTuple):
    kind: str
    start: int
    end: int


STARRABLE = frozenset(
    """part chapter section subsection subsubsection paragraph subparagraph newcommand
    renewcommand providecommand newenvironment renewenvironment DeclareMathOperator
    vspace hspace newtheorem caption tableofcontents""".split()
)

# o = optional [..], m = mandatory {..}, c = mandatory group or single control word
ARG_SPECS: dict[str, str] = {
    "documentclass": "om",
    "usepackage": "om",
    "RequirePackage": "om",
    "newcommand": "coom",
    "renewcommand": "coom",
    "providecommand": "coom",
    "DeclareMathOperator": "cm",
    "newenvironment": "moomm",
    "renewenvironment": "moomm",
    "newtheorem": "momo",
    "frac": "mm",
    "dfrac": "mm",
    "tfrac": "mm",
    "sqrt": "om",
    "includegraphics": "om",
    "caption": "om",
    "item": "o",
    "bibitem": "om",
    "footnote": "om",
    "multicolumn": "mmm",
    "section": "om",
    "subsection": "om",
    "subsubsection": "om",
    "chapter": "om",
    "paragraph": "om",
    "title": "om",
    "author": "om",
    "input": "m",
    "include": "m",
    "bibliography": "m",
    "bibliographystyle": "m",
    "newcounter": "mo",
    "setcounter": "mm",
    "setlength": "cm",
    "newlength": "c",
    "\\": "o",
}
CITE_COMMANDS = frozenset(
    """cite citep citet citealp citealt citeauthor citeyear citenum parencite textcite
    autocite footcite fullcite nocite Cite Citep Citet supercite""".split()
)
LABEL_COMMANDS = frozenset("label ref eqref pageref autoref cref Cref nameref vref labelcref".split())
REF_COMMANDS = LABEL_COMMANDS - {"label"}
VERB_COMMANDS = frozenset({"verb", "lstinline"})
URL_COMMANDS = frozenset({"url", "path", "href", "nolinkurl"})
DEFINING = frozenset({"newcommand", "renewcommand", "providecommand", "DeclareMathOperator"})

ENV_ARG_SPECS: dict[str, str] = {
    "tabular": "om",
    "tabular*": "mom",
    "tabularx": "mm",
    "array": "om",
    "longtable": "om",
    "figure": "o",
    "figure*": "o",
    "table": "o",
    "table*": "o",
    "algorithm": "o",
    "minipage": "ooom",
    "thebibliography": "m",
    "multicols": "m",
    "subfigure": "om",
    "enumerate": "o",
    "itemize": "o",
    "alignat": "m",
    "alignat*": "m",
    "wrapfigure": "omm",
    "filecontents": "om",
    "filecontents*": "om",
    "minted": "om",
    "lstlisting": "o",
}

MATH_CLOSERS = {"$": "$", "$$": "$$", "\\(": "\\)", "\\[": "\\]"}


class _Frame(NamedTuple):
    kind: str  # group | opt | env | math
    name: str | None = None


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0
        self.limit = len(text)
        self.frames: list[_Frame] = []
        self.math = False
        self.macros: dict[str, int] = {}
        self.environments: set[str] = set()
        self.doc = SourceDocument(text)

    # -- lexing ---------------------------------------------------------
    def token(self, pos: int | None = None) -> Token | None:
        pos = self.pos if pos is None else pos
        if pos >= self.limit:
            return None
        m = _TOKEN.match(self.text, pos)
        assert m is not None
        if m.end() > self.limit:
            return None
        return Token(m.lastgroup, pos, m.end())

    def span(self, start: int, end: int):
        return self.doc.span(start, end)

    # -- helpers --------------------------------------------------------
    def _env_name_at(self, pos: int) -> tuple[str, int] | None:
        """For a ``\\begin``/``\\end`` at ``pos``, return (name, end offset of ``{name}``)."""
        m = _HSPACE.match(self.text, pos)
        start = m.end()
        m = _NAME.match(self.text, start)
        if m is None or m.end() > self.limit:
            return None
        return m.group(1).strip(), m.end()

    def _cs_name(self, tok: Token) -> str:
        return self.text[tok.start + 1 : tok.end]

    def _is_par(self, tok: Token) -> bool:
        return tok.kind == "newline" and _PAR_AHEAD.match(self.text, tok.end) is not None

    def _has_frame(self, kind: str, name: str | None = None) -> bool:
        return any(f.kind == kind and (name is None or f.name == name) for f in self.frames)

    def _has_math_delim(self) -> bool:
        return any(f.kind == "math" for f in self.frames)

    def classify_closer(self, tok: Token) -> str | None:
        """``close`` if ``tok`` ends the top frame, ``interrupt`` if a deeper one,
        ``orphan`` if it ends none, ``None`` if it is not a closer."""
        top = self.frames[-1] if self.frames else None
        kind = tok.kind
        if kind == "rbrace":
            if not self._has_frame("group"):
                return "orphan"
            return "close" if top.kind == "group" else "interrupt"
        if kind == "rbrack":
            return "close" if top is not None and top.kind == "opt" else None
        if kind == "dollar":
            for f in reversed(self.frames):
                if f.kind == "math":
                    if f is top and f.name == "$":
                        return "close"
                    if f is top and f.name == "$$" and self.text.startswith("$", tok.end):
                        return "close"
                    return "interrupt"
            return "orphan" if self.math else None
        if kind == "csym":
            sym = self.text[tok.start : tok.end]
            if sym in ("\\)", "\\]"):
                for f in reversed(self.frames):
                    if f.kind == "math":
                        if MATH_CLOSERS[f.name] == sym:
                            return "close" if f is top else "interrupt"
                        break
                return "orphan"
            return None
        if kind == "cs" and self._cs_name(tok) == "end":
            found = self._env_name_at(tok.end)
            if found is None:
                return None
            name = found[0]
            if not self._has_frame("env", name):
                return "orphan"
            return "close" if top.kind == "env" and top.name == name else "interrupt"
        if kind == "newline" and self._has_math_delim() and self._is_par(tok):
            return "interrupt"
        return None

    # -- sequences ------------------------------------------------------
    def parse_seq(self) -> tuple[list[AstNode], str]:
        """Parse until a closer/interrupt/EOF. Returns (nodes, status)."""
        out: list[AstNode] = []
        text_start: int | None = None

        def flush(end: int) -> None:
            nonlocal text_start
            if text_start is not None and text_start < end:
                out.append(AstNode(NodeKind.TEXT, self.span(text_start, end), parts=(self.text[text_start:end],)))
            text_start = None

        while True:
            tok = self.token()
            if tok is None:
                flush(self.pos)
                return out, "eof"
            action = self.classify_closer(tok)
            if action in ("close", "interrupt"):
                flush(self.pos)
                return out, action
            if action == "orphan":
                flush(self.pos)
                out.append(self.parse_orphan(tok))
                continue
            node = self.parse_item(tok)
            if node is None:
                if text_start is None:
                    text_start = tok.start
                self.pos = tok.end
            else:
                flush(tok.start)
                out.append(node)

    def parse_orphan(self, tok: Token) -> AstNode:
        start = tok.start
        if tok.kind == "rbrace":
            self.pos = tok.end
            return AstNode(NodeKind.ERROR, self.span(start, tok.end), "}", ("}",), ErrorKind.UNMATCHED_BRACE)
        if tok.kind == "dollar":
            self.pos = tok.end
            return AstNode(NodeKind.ERROR, self.span(start, tok.end), "$", ("$",), ErrorKind.STRAY_DOLLAR)
        if tok.kind == "csym":
            self.pos = tok.end
            sym = self.text[start : tok.end]
            return AstNode(NodeKind.ERROR, self.span(start, tok.end), sym[1:], (sym,), ErrorKind.UNMATCHED_MATH_DELIMITER)
        cmd = self.parse_begin_end(tok, "end")
        return AstNode(NodeKind.ERROR, cmd.span, cmd.args[0].inner_text().strip(), (cmd,), ErrorKind.UNMATCHED_END)

    def parse_item(self, tok: Token) -> AstNode | None:
        kind = tok.kind
        if kind == "comment":
            self.pos = tok.end
            return AstNode(NodeKind.COMMENT, self.span(tok.start, tok.end), parts=(self.text[tok.start : tok.end],))
        if kind == "lbrace":
            return self.parse_group(None)
        if kind == "dollar":
            if self.math:
                return None
            if self.text.startswith("$", tok.end) and tok.end < self.limit:
                return self.parse_math("$$", tok.start, tok.end + 1)
            return self.parse_math("$", tok.start, tok.end)
        if kind == "csym":
            sym = self.text[tok.start : tok.end]
            if sym in ("\\(", "\\[") and not self.math:
                return self.parse_math(sym, tok.start, tok.end)
            if sym == "\\\\":
                return self.parse_command(tok, "\\")
            self.pos = tok.end
            return AstNode(NodeKind.COMMAND, self.span(tok.start, tok.end), sym[1:], (sym,))
        if kind == "cs":
            name = self._cs_name(tok)
            if name == "begin":
                return self.parse_environment(tok)
            return self.parse_command(tok, name)
        return None

    # -- constructs -----------------------------------------------------
    def _push(self, frame: _Frame) -> bool:
        if len(self.frames) >= MAX_DEPTH:
            return False
        self.frames.append(frame)
        return True

    def parse_group(self, arg: str | None, optional: bool = False) -> AstNode | None:
        start = self.pos
        if not self._push(_Frame("opt" if optional else "group")):
            return None
        self.pos += 1
        body, status = self.parse_seq()
        self.frames.pop()
        opener, closer = ("[", "]") if optional else ("{", "}")
        if status == "close":
            self.pos += 1
            return AstNode(NodeKind.GROUP, self.span(start, self.pos), parts=(opener, *body, closer), arg=arg)
        return AstNode(NodeKind.ERROR, self.span(start, self.pos), parts=(opener, *body), error=ErrorKind.UNCLOSED_GROUP, arg=arg)

    def _optional_ahead(self, pos: int) -> bool:
        """Whether a ``[`` at ``pos`` has a matching ``]`` at brace depth 0."""
        depth = 0
        p = pos + 1
        text = self.text
        while p < self.limit:
            c = text[p]
            if c == "\\":
                p += 2
                continue
            if c == "%":
                nl = text.find("\n", p)
                p = self.limit if nl == -1 else nl
                continue
            if c == "{":
                depth += 1
            elif c == "}":
                if depth == 0:
                    return False
                depth -= 1
            elif c == "]" and depth == 0:
                return True
            elif c == "\n" and _PAR_AHEAD.match(text, p + 1):
                return False
            p += 1
        return False

    def parse_args(self, spec: str, parts: list[Part], adjacent: bool = False) -> None:
        for want in spec:
            if want == "o":
                m = _HSPACE.match(self.text, self.pos)
                at = self.pos if adjacent else m.end()
                if at < self.limit and self.text[at] == "[" and self._optional_ahead(at):
                    if at > self.pos:
                        parts.append(self.text[self.pos : at])
                    self.pos = at
                    node = self.parse_group("o", optional=True)
                    if node is None:
                        return
                    parts.append(node)
                continue
            m = _ARG_SPACE.match(self.text, self.pos)
            at = self.pos if adjacent else m.end()
            if at >= self.limit:
                return
            if self.text[at] == "{":
                if at > self.pos:
                    parts.append(self.text[self.pos : at])
                self.pos = at
                node = self.parse_group("m")
                if node is None:
                    return
                parts.append(node)
            elif want == "c" and self.text[at] == "\\":
                tok = self.token(at)
                if tok is None or tok.kind not in ("cs", "csym"):
                    return
                if at > self.pos:
                    parts.append(self.text[self.pos : at])
                parts.append(AstNode(NodeKind.COMMAND, self.span(at, tok.end), self.text[at + 1 : tok.end], (self.text[at : tok.end],), arg="m"))
                self.pos = tok.end
            else:
                return

    def _raw_group(self, parts: list[Part]) -> bool:
        """Consume a brace group verbatim (for URLs)."""
        text = self.text
        at = self.pos
        if at >= self.limit or text[at] != "{":
            return False
        depth = 0
        p = at
        while p < self.limit:
            c = text[p]
            if c == "\n" and _PAR_AHEAD.match(text, p + 1):
                return False
            if c == "{":
                depth += 1
            elif c == "}":
                depth -= 1
                if depth == 0:
                    inner = text[at + 1 : p]
                    kids: tuple[Part, ...] = ("{",)
                    if inner:
                        kids += (AstNode(NodeKind.TEXT, self.span(at + 1, p), parts=(inner,)),)
                    parts.append(AstNode(NodeKind.GROUP, self.span(at, p + 1), parts=kids + ("}",), arg="m"))
                    self.pos = p + 1
                    return True
            p += 1
        return False

    def parse_command(self, tok: Token, name: str) -> AstNode:
        start = tok.start
        self.pos = tok.end
        if name in STARRABLE and self.text.startswith("*", self.pos) and self.pos < self.limit:
            self.pos += 1
            name += "*"
        head = self.text[start : self.pos]
        parts: list[Part] = [head]
        base = name.rstrip("*")

        if base in VERB_COMMANDS:
            p = self.pos
            if p < self.limit and self.text[p] == "*" and base == "verb":
                p += 1
            if p < self.limit and self.text[p] not in " \t\n\r{" and not self.text[p].isalpha():
                delim = self.text[p]
                close = self.text.find(delim, p + 1)
                nl = self.text.find("\n", p + 1)
                if close != -1 and close < self.limit and (nl == -1 or close < nl):
                    parts = [self.text[start : close + 1]]
                    self.pos = close + 1
                    return AstNode(NodeKind.COMMAND, self.span(start, self.pos), base, tuple(parts))
        elif base in URL_COMMANDS:
            self._raw_group(parts)
            if base == "href":
                self.parse_args("m", parts, adjacent=False)
        elif base == "def" or base == "gdef" or base == "edef":
            self._parse_def(parts)
        else:
            spec = ARG_SPECS.get(base)
            if base in CITE_COMMANDS:
                spec = "oom"
            elif base in LABEL_COMMANDS:
                spec = "m"
            if spec is not None:
                self.parse_args(spec, parts)
            else:
                self._generic_args(parts)

        span = self.span(start, self.pos)
        node_kind = NodeKind.COMMAND
        node_name = name
        macro = None
        if base in CITE_COMMANDS or base in LABEL_COMMANDS or base in ("usepackage", "RequirePackage", "documentclass"):
            mand = [p for p in parts if not isinstance(p, str) and p.arg == "m" and p.kind is NodeKind.GROUP]
            if mand:
                macro = name
                node_name = mand[-1].inner_text().strip()
                node_kind = {
                    "usepackage": NodeKind.PACKAGE_DECL,
                    "RequirePackage": NodeKind.PACKAGE_DECL,
                    "documentclass": NodeKind.DOCUMENT_CLASS_DECL,
                }.get(base, NodeKind.CITE_REF if base in CITE_COMMANDS else NodeKind.LABEL_REF)
        node = AstNode(node_kind, span, node_name, tuple(parts), macro=macro)
        if base in DEFINING:
            self._record_macro(node)
        elif base in ("newenvironment", "renewenvironment", "newtheorem"):
            mand = [a for a in node.args if a.arg == "m"]
            if mand:
                self.environments.add(mand[0].inner_text().strip())
        return node

    def _generic_args(self, parts: list[Part]) -> None:
        """Unknown commands take adjacent ``{..}``/``[..]`` groups only."""
        while self.pos < self.limit:
            c = self.text[self.pos]
            if c == "{":
                node = self.parse_group("m")
            elif c == "[" and not self.math and self._optional_ahead(self.pos):
                node = self.parse_group("o", optional=True)
            else:
                return
            if node is None:
                return
            parts.append(node)
            if node.is_error:
                return

    def _parse_def(self, parts: list[Part]) -> None:
        tok = self.token()
        if tok is None or tok.kind not in ("cs", "csym"):
            return
        parts.append(AstNode(NodeKind.COMMAND, self.span(tok.start, tok.end), self._cs_name(tok), (self.text[tok.start : tok.end],), arg="m"))
        self.pos = tok.end
        brace = self.text.find("{", self.pos, self.limit)
        if brace == -1:
            return
        params = self.text[self.pos : brace]
        if "\n\n" in params or "}" in params or "\\" in params:
            return
        if params:
            parts.append(params)
        self.pos = brace
        arity = params.count("#")
        node = self.parse_group("m")
        if node is not None:
            parts.append(node)
        self.macros[parts[1].name] = arity

    def _record_macro(self, node: AstNode) -> None:
        args = node.args
        if not args:
            return
        target = args[0]
        name = target.name if target.kind is NodeKind.COMMAND else target.inner_text().strip().lstrip("\\")
        arity = 0
        for a in args[1:]:
            if a.arg == "o":
                try:
                    arity = int(a.inner_text().strip())
                except ValueError:
                    pass
                break
        if name:
            self.macros[name] = arity

    def parse_begin_end(self, tok: Token, which: str) -> AstNode:
        found = self._env_name_at(tok.end)
        assert found is not None
        _, end = found
        group_start = self.text.index("{", tok.end)
        parts: list[Part] = [self.text[tok.start : tok.end]]
        if group_start > tok.end:
            parts.append(self.text[tok.end : group_start])
        inner_start, inner_end = group_start + 1, end - 1
        kids: tuple[Part, ...] = ("{",)
        if inner_end > inner_start:
            kids += (AstNode(NodeKind.TEXT, self.span(inner_start, inner_end), parts=(self.text[inner_start:inner_end],)),)
        parts.append(AstNode(NodeKind.GROUP, self.span(group_start, end), parts=kids + ("}",), arg="m"))
        self.pos = end
        return AstNode(NodeKind.COMMAND, self.span(tok.start, end), which, tuple(parts))

    def parse_environment(self, tok: Token) -> AstNode:
        found = self._env_name_at(tok.end)
        if found is None:
            return self.parse_command(tok, "begin")
        name = found[0]
        start = tok.start
        begin = self.parse_begin_end(tok, "begin")
        parts: list[Part] = [begin]
        spec = ENV_ARG_SPECS.get(name)
        if spec:
            self.parse_args(spec, parts)

        if name in VERBATIM_ENVIRONMENTS:
            marker = "\\end{" + name + "}"
            close = self.text.find(marker, self.pos, self.limit)
            body_end = self.limit if close == -1 else close
            if body_end > self.pos:
                parts.append(AstNode(NodeKind.TEXT, self.span(self.pos, body_end), parts=(self.text[self.pos : body_end],)))
            self.pos = body_end
            if close == -1:
                return AstNode(NodeKind.ERROR, self.span(start, self.pos), name, tuple(parts), ErrorKind.UNCLOSED_ENVIRONMENT)
            end_tok = self.token()
            parts.append(self.parse_begin_end(end_tok, "end"))
            return AstNode(NodeKind.ENVIRONMENT, self.span(start, self.pos), name, tuple(parts))

        if not self._push(_Frame("env", name)):
            return AstNode(NodeKind.COMMAND, begin.span, "begin", begin.parts)
        saved_math = self.math
        if name in MATH_ENVIRONMENTS:
            self.math = True
        body, status = self.parse_seq()
        self.math = saved_math
        self.frames.pop()
        parts.extend(body)
        if status == "close":
            end_tok = self.token()
            parts.append(self.parse_begin_end(end_tok, "end"))
            return AstNode(NodeKind.ENVIRONMENT, self.span(start, self.pos), name, tuple(parts))
        return AstNode(NodeKind.ERROR, self.span(start, self.pos), name, tuple(parts), ErrorKind.UNCLOSED_ENVIRONMENT)

    def parse_math(self, opener: str, start: int, body_start: int) -> AstNode | None:
        kind = NodeKind.MATH_INLINE if opener in ("$", "\\(") else NodeKind.MATH_DISPLAY
        if not self._push(_Frame("math", opener)):
            return None
        self.pos = body_start
        saved_math = self.math
        self.math = True
        body, status = self.parse_seq()
        self.frames.pop()
        if status == "close":
            closer = MATH_CLOSERS[opener]
            self.pos += len(closer)
            self.math = saved_math
            return AstNode(kind, self.span(start, self.pos), opener, (opener, *body, closer))

        # Unterminated: the error covers the rest of the opener's line only.
        stop = self.pos
        eol = self.text.find("\n", body_start)
        if eol == -1:
            eol = len(self.text)
        limit = min(stop, eol)
        saved_limit, saved_frames = self.limit, self.frames
        self.limit = limit
        self.frames = []
        self.pos = body_start
        body, _ = self.parse_seq()
        if self.pos < limit:
            body.append(AstNode(NodeKind.TEXT, self.span(self.pos, limit), parts=(self.text[self.pos : limit],)))
            self.pos = limit
        self.limit, self.frames = saved_limit, saved_frames
        self.math = saved_math
        return AstNode(NodeKind.ERROR, self.span(start, self.pos), opener, (opener, *body), ErrorKind.UNTERMINATED_MATH)


def parse(doc: SourceDocument | str) -> Ast:
    """Parse a document into a lossless AST. Never raises on any input text."""
    if isinstance(doc, str):
        doc = SourceDocument(doc)
    p = _Parser(doc.text)
    p.doc = doc
    body, status = p.parse_seq()
    # top level has no frames, so only EOF can stop it
    assert status == "eof" and p.pos == len(doc.text), (status, p.pos)
    root = AstNode(NodeKind.GROUP, doc.span(0, len(doc.text)), None, tuple(body))
    return Ast(root, doc, dict(p.macros), frozenset(p.environments))
