"""Deterministic rule catalog used as the built-in suggestion provider."""

from __future__ import annotations

import re
from collections.abc import Callable

from ..checks import KNOWN_ENCODINGS, TABULAR_ENVIRONMENTS, TEXT_ARG_COMMANDS, _Checker
from ..latex import Ast, AstNode, Edit, ErrorKind, NodeKind, Patch, SourceDocument
from ..localize import Diagnostic, _in_math
from ..packagedb import ConflictKind, PackageDb, SymbolKind
from .base import FixCandidate
from .distance import nearest, typo_threshold

PROVIDER_ID = "rules"

# unicode characters with a standard LaTeX spelling; True marks math-mode commands
ESCAPES: dict[str, tuple[str, bool]] = {
    "α": ("\\alpha", True), "β": ("\\beta", True), "γ": ("\\gamma", True), "δ": ("\\delta", True),
    "ε": ("\\epsilon", True), "ζ": ("\\zeta", True), "η": ("\\eta", True), "θ": ("\\theta", True),
    "κ": ("\\kappa", True), "λ": ("\\lambda", True), "μ": ("\\mu", True), "ν": ("\\nu", True),
    "ξ": ("\\xi", True), "π": ("\\pi", True), "ρ": ("\\rho", True), "σ": ("\\sigma", True),
    "τ": ("\\tau", True), "φ": ("\\phi", True), "χ": ("\\chi", True), "ψ": ("\\psi", True),
    "ω": ("\\omega", True), "Γ": ("\\Gamma", True), "Δ": ("\\Delta", True), "Θ": ("\\Theta", True),
    "Λ": ("\\Lambda", True), "Π": ("\\Pi", True), "Σ": ("\\Sigma", True), "Φ": ("\\Phi", True),
    "Ψ": ("\\Psi", True), "Ω": ("\\Omega", True), "≤": ("\\leq", True), "≥": ("\\geq", True),
    "≠": ("\\neq", True), "≈": ("\\approx", True), "≡": ("\\equiv", True), "→": ("\\rightarrow", True),
    "←": ("\\leftarrow", True), "⇒": ("\\Rightarrow", True), "⇐": ("\\Leftarrow", True),
    "↔": ("\\leftrightarrow", True), "∞": ("\\infty", True), "∑": ("\\sum", True), "∏": ("\\prod", True),
    "∫": ("\\int", True), "√": ("\\surd", True), "∈": ("\\in", True), "∉": ("\\notin", True),
    "∀": ("\\forall", True), "∃": ("\\exists", True), "∂": ("\\partial", True), "∇": ("\\nabla", True),
    "∅": ("\\emptyset", True), "∩": ("\\cap", True), "∪": ("\\cup", True), "⊂": ("\\subset", True),
    "⊆": ("\\subseteq", True), "⊃": ("\\supset", True), "∧": ("\\wedge", True), "∨": ("\\vee", True),
    "¬": ("\\neg", True), "∘": ("\\circ", True), "⋅": ("\\cdot", True), "∼": ("\\sim", True),
    "ℓ": ("\\ell", True), "ħ": ("\\hbar", True), "ℝ": ("\\mathbb{R}", True), "←→": ("\\leftrightarrow", True),
    "♥": ("\\heartsuit", True), "♠": ("\\spadesuit", True), "★": ("\\star", True), "−": ("-", False),
    " ": ("~", False), " ": ("\\,", False), "​": ("", False), "﻿": ("", False),
}
T1_COMMANDS = {"th", "TH", "dh", "DH", "ng", "NG", "guillemotleft", "guillemotright"}


# -- shared helpers -------------------------------------------------------


def _candidate(rule: str, description: str, *edits: Edit, rationale: str | None = None) -> FixCandidate:
    return FixCandidate(Patch(tuple(edits), description), PROVIDER_ID, rule, rationale or description)


def node_path(ast: Ast, diag: Diagnostic) -> tuple[AstNode, ...]:
    """Path to the outermost node whose span equals the diagnostic span, else the deepest containing it."""
    path = ast.path_to(diag.span.start)
    for i, node in enumerate(path[1:], 1):
        if node.span.start == diag.span.start and node.span.end == diag.span.end:
            return path[: i + 1]
    return path


def preamble_insertion(ast: Ast, line: str) -> Edit:
    """Insert ``line`` after the last preamble package line (or the class line)."""
    doc = ast.source
    anchor = None
    decls = [n for n in ast.package_decls if n.span.start < ast.preamble_end]
    if decls:
        anchor = decls[-1]
    else:
        anchor = next((n for n in ast.nodes if n.kind is NodeKind.DOCUMENT_CLASS_DECL), None)
    if anchor is None:
        return Edit.insert(doc, 0, line + "\n")
    ln = doc.line_of(max(anchor.span.end - 1, anchor.span.start))
    return Edit.insert(doc, doc.line_span(ln).end, "\n" + line)


def delete_node_line(doc: SourceDocument, node: AstNode) -> Edit:
    """Delete ``node``; if it is alone on its line, delete the whole line."""
    first = doc.line_of(node.span.start)
    last = doc.line_of(max(node.span.end - 1, node.span.start))
    start, _ = doc.line_bounds(first)
    _, end = doc.line_bounds(last)
    if doc.text[start:node.span.start].strip() == "" and doc.text[node.span.end:end].strip() == "":
        return Edit.replace(doc, start, end, "")
    return Edit.replace(doc, node.span.start, node.span.end, "")


def _group_name_span(cmd: AstNode) -> tuple[int, int] | None:
    """Inner offsets of the ``{name}`` group of a ``\\begin``/``\\end`` command."""
    for a in cmd.args:
        if a.arg == "m":
            return a.span.start + 1, a.span.end - 1
    return None


def _end_of(env: AstNode) -> AstNode | None:
    kids = env.children
    if kids and kids[-1].kind is NodeKind.COMMAND and kids[-1].name == "end":
        return kids[-1]
    return None


def _key_spans(doc: SourceDocument, node: AstNode) -> dict[str, tuple[int, int]]:
    """Offsets of each comma-separated key inside the last mandatory argument."""
    mand = [a for a in node.args if a.arg == "m" and a.kind is NodeKind.GROUP]
    if not mand:
        return {}
    g = mand[-1]
    out = {}
    for m in re.finditer(r"[^,\s][^,]*", doc.text[g.span.start + 1 : g.span.end - 1]):
        key = m.group(0).rstrip()
        start = g.span.start + 1 + m.start()
        out.setdefault(key, (start, start + len(key)))
    return out


def _nth(items: list, attempt: int):
    return items[attempt - 1] if 0 < attempt <= len(items) else None


# -- R1 missing package -----------------------------------------------------


def r1_missing_package(diag: Diagnostic, ast: Ast, db: PackageDb, attempt: int) -> list[FixCandidate]:
    providers = [p for p in diag.details.get("providers", "").split(",") if p]
    name = _nth(providers, attempt)
    if name is None or name not in db:
        return []
    line = db.records[name].usepackage_line()
    return [
        _candidate(
            "R1-missing-package",
            f"add {line}",
            preamble_insertion(ast, line),
            rationale=f"\\{diag.token} is provided by {name}; load it in the preamble.",
        )
    ]


# -- R2 math ------------------------------------------------------------------

_MATH_TOKEN = re.compile(r"\\[A-Za-z]+|\\.|\{|\}|[A-Za-z]+|\s+|.", re.S)
# commands that only occur in running text, so a formula never extends across them
_TEXT_COMMANDS = TEXT_ARG_COMMANDS | {"cite", "citep", "citet", "ref", "eqref", "label", "url", "href", "footnote", "emph", "textcolor"}


def _prose(tok: str, following: str = " ") -> bool:
    if tok == "$" or (tok.startswith("\\") and tok[1:] in _TEXT_COMMANDS):
        return True
    if tok in ".;:!?," and (following == "" or following[0].isspace()):
        return True
    return tok.isalpha() and len(tok) >= 2


def _math_extent(body: str) -> int:
    """Length of the leading part of ``body`` that looks like a formula."""
    depth = 0
    last = 0
    for m in _MATH_TOKEN.finditer(body):
        tok = m.group(0)
        if tok == "{":
            depth += 1
        elif tok == "}":
            depth = max(0, depth - 1)
        elif depth == 0 and _prose(tok, body[m.end() : m.end() + 1]):
            break
        if not tok.isspace():
            last = m.end()
    return last


def _formula_start(doc: SourceDocument, offset: int) -> int:
    """Start of the formula-like run of tokens ending at ``offset`` on its line."""
    line_start = doc.line_bounds(doc.line_of(offset))[0]
    tokens = list(_MATH_TOKEN.finditer(doc.text, line_start, offset))
    depth = 0
    lo = offset
    for k in range(len(tokens) - 1, -1, -1):
        tok = tokens[k].group(0)
        if tok == "}":
            depth += 1
        elif tok == "{":
            depth = max(0, depth - 1)
        elif depth == 0 and _prose(tok, doc.text[tokens[k].end() : tokens[k].end() + 1]):
            break
        if not tok.isspace():
            lo = tokens[k].start()
    return lo


def _formula_bounds(doc: SourceDocument, start: int, end: int) -> tuple[int, int]:
    line_end = doc.line_span(doc.line_of(start)).end
    return _formula_start(doc, start), end + _math_extent(doc.text[end:line_end])


def _orphan_dollar(ast: Ast, offset: int) -> bool:
    """Whether a ``$`` at ``offset`` opens math that never closes."""
    doc = ast.source
    if doc.text[offset : offset + 1] != "$":
        return False
    return any(
        n.span.start == offset and n.error in (ErrorKind.UNTERMINATED_MATH, ErrorKind.STRAY_DOLLAR)
        for n in ast.path_to(offset)
    )


def _wrap_options(ast: Ast, start: int, end: int, what: str) -> list[FixCandidate]:
    doc = ast.source
    lo, hi = _formula_bounds(doc, start, end)
    rest = doc.text[hi : doc.line_span(doc.line_of(hi)).end]
    closer = hi + len(rest) - len(rest.lstrip(" "))
    options = []
    if _orphan_dollar(ast, closer):
        options.append(_candidate("R2-math-wrap", "restore the opening $", Edit.insert(doc, lo, "$")))
    options.append(_candidate("R2-math-wrap", "wrap the formula in math mode", Edit.insert(doc, lo, "$"), Edit.insert(doc, hi, "$")))
    if (lo, hi) != (start, end):
        options.append(_candidate("R2-math-wrap", f"wrap {what} in math mode", Edit.insert(doc, start, "$"), Edit.insert(doc, end, "$")))
    return options


def _wrap_word(doc: SourceDocument, start: int, end: int) -> tuple[int, int]:
    text = doc.text
    lo = start
    while lo > 0 and not text[lo - 1].isspace() and text[lo - 1] not in "${}":
        lo -= 1
    hi = end
    while hi < len(text) and not text[hi].isspace() and text[hi] not in "$":
        hi += 1
    while hi > end and text[hi - 1] in ".,;:!?)":
        hi -= 1
    return lo, hi


def r2_math(diag: Diagnostic, ast: Ast, db: PackageDb, attempt: int) -> list[FixCandidate]:
    doc = ast.source
    path = node_path(ast, diag)
    node = path[-1]
    options: list[FixCandidate] = []
    if node.error is ErrorKind.UNTERMINATED_MATH and node.span == diag.span:
        opener = node.name or "$"
        closer = {"$": "$", "$$": "$$", "\\(": "\\)", "\\[": "\\]"}[opener]
        body_start = node.span.start + len(opener)
        body = doc.text[body_start : node.span.end]
        extent = _math_extent(body)
        if extent > 0:
            options.append(_candidate("R2-math-wrap", f"close the formula with {closer}", Edit.insert(doc, body_start + extent, closer)))
        elif opener == "$":
            # nothing formula-like follows: the $ more likely closes a formula that lost its opener
            lo = _formula_start(doc, node.span.start)
            if lo < node.span.start:
                options.append(_candidate("R2-math-wrap", "restore the opening $", Edit.insert(doc, lo, "$")))
        options.append(_candidate("R2-math-wrap", f"remove the unmatched {opener}", Edit.replace(doc, node.span.start, body_start, "")))
        tail = len(body.rstrip().rstrip(".,;:"))
        if tail > 0 and tail != extent:
            options.append(_candidate("R2-math-wrap", f"close the formula at the end of the line", Edit.insert(doc, body_start + tail, closer)))
    elif node.error in (ErrorKind.STRAY_DOLLAR, ErrorKind.UNMATCHED_MATH_DELIMITER) and node.span == diag.span:
        options.append(_candidate("R2-math-wrap", "remove the unmatched math delimiter", Edit.replace(doc, node.span.start, node.span.end, "")))
    elif node.kind is NodeKind.COMMAND and node.span == diag.span:
        end = node.span.end
        m = re.compile(r"(?:[_^](?:\{[^{}\n]*\}|\\?[A-Za-z0-9]))+").match(doc.text, end)
        if m:
            end = m.end()
        options += _wrap_options(ast, node.span.start, end, f"\\{node.name}")
    elif diag.span.end - diag.span.start == 1 and doc.text[diag.span.start] in "^_":
        lo, hi = _wrap_word(doc, diag.span.start, diag.span.end)
        options += _wrap_options(ast, lo, hi, "the expression")
        ch = doc.text[diag.span.start]
        options.append(_candidate("R2-math-wrap", f"escape the {ch}", Edit.replace(doc, diag.span.start, diag.span.end, "\\" + ch + ("{}" if ch == "^" else ""))))
    option = _nth(options, attempt)
    return [option] if option else []


# -- R3 environments --------------------------------------------------------------


def r3_environment(diag: Diagnostic, ast: Ast, db: PackageDb, attempt: int) -> list[FixCandidate]:
    doc = ast.source
    path = node_path(ast, diag)
    node = path[-1]
    options: list[FixCandidate] = []
    want = diag.token or ""
    if node.error is ErrorKind.UNMATCHED_END:
        end_cmd = node.children[0]
        inner = _group_name_span(end_cmd)
        if inner and want:
            options.append(_candidate("R3-close-environment", f"rename \\end{{{node.name}}} to \\end{{{want}}}", Edit.replace(doc, *inner, want)))
        options.append(_candidate("R3-close-environment", f"delete the unmatched \\end{{{node.name}}}", delete_node_line(doc, node)))
    else:
        env = next((p for p in reversed(path) if p.error is ErrorKind.UNCLOSED_ENVIRONMENT), None)
        if env is None:
            return []
        name = env.name or want
        closing = f"\\end{{{name}}}"
        points: list[int] = []
        m = re.compile(r"\n[ \t]*\n").search(doc.text, env.begin.span.end if env.begin else env.span.start, env.span.end)
        if m:
            points.append(m.start() + 1)
        points.append(env.span.end)
        for at in dict.fromkeys(points):
            line_start = doc.line_bounds(doc.line_of(at))[0] if at < len(doc.text) else at
            if at == line_start:
                edit = Edit.insert(doc, at, closing + "\n")
            else:
                edit = Edit.insert(doc, at, "\n" + closing)
            options.append(_candidate("R3-close-environment", f"insert {closing}", edit))
    option = _nth(options, attempt)
    return [option] if option else []


# -- R4 typos -----------------------------------------------------------------------


def _replace_command_name(doc: SourceDocument, node: AstNode, old: str, new: str) -> Edit:
    start = node.span.start + 1
    return Edit.replace(doc, start, start + len(old), new)


def r4_typo(diag: Diagnostic, ast: Ast, db: PackageDb, attempt: int) -> list[FixCandidate]:
    doc = ast.source
    token = (diag.token or "").rstrip("*")
    node = node_path(ast, diag)[-1]
    if diag.pattern == "undefined-cs":
        if not token or doc.text[node.span.start + 1 : node.span.start + 1 + len(token)] != token:
            return []
        pool = db.all_symbols(SymbolKind.COMMAND) | set(ast.macros)
        near = nearest(token, pool, typo_threshold(token))
        pick = _nth(near, attempt)
        if pick is None:
            return []
        return [_candidate("R4-typo", f"replace \\{token} with \\{pick[1]}", _replace_command_name(doc, node, token, pick[1]))]
    if diag.pattern == "env-undefined":
        env = next((p for p in reversed(node_path(ast, diag)) if p.begin is not None and p.name == token), None)
        if env is None:
            return []
        pool = db.all_symbols(SymbolKind.ENVIRONMENT) | set(ast.environments)
        pick = _nth(nearest(token, pool, typo_threshold(token)), attempt)
        if pick is None:
            return []
        edits = [Edit.replace(doc, *_group_name_span(env.begin), pick[1])]
        end = _end_of(env)
        if end is not None and _group_name_span(end):
            edits.append(Edit.replace(doc, *_group_name_span(end), pick[1]))
        return [_candidate("R4-typo", f"rename environment {token} to {pick[1]}", *edits)]
    if diag.pattern == "file-not-found" and node.kind is NodeKind.PACKAGE_DECL:
        name = re.sub(r"\.(sty|cls)$", "", token)
        spans = _key_spans(doc, node)
        if name not in spans:
            return []
        pick = _nth(nearest(name, db.records.keys(), typo_threshold(name)), attempt)
        if pick is None:
            return []
        return [_candidate("R4-typo", f"replace package {name} with {pick[1]}", Edit.replace(doc, *spans[name], pick[1]))]
    return []


# -- R5 references ------------------------------------------------------------------


def r5_reference(diag: Diagnostic, ast: Ast, db: PackageDb, attempt: int) -> list[FixCandidate]:
    doc = ast.source
    node = node_path(ast, diag)[-1]
    key = diag.token or ""
    spans = _key_spans(doc, node)
    if key not in spans:
        return []
    if diag.pattern == "citation-undefined":
        pool = _Checker(ast, db).bib_keys() or set()
    else:
        pool = {k for n in ast.nodes if n.kind is NodeKind.LABEL_REF and n.macro == "label" for k in n.keys}
    pick = _nth(nearest(key, pool, typo_threshold(key)), attempt)
    if pick is None:
        return []
    return [_candidate("R5-reference", f"replace key {key} with {pick[1]}", Edit.replace(doc, *spans[key], pick[1]))]


# -- R6 encoding ---------------------------------------------------------------------


def r6_encoding(diag: Diagnostic, ast: Ast, db: PackageDb, attempt: int) -> list[FixCandidate]:
    doc = ast.source
    options: list[FixCandidate] = []
    span = diag.span
    if diag.pattern == "unicode-char":
        ch = doc.text[span.start : span.end]
        if ch in ESCAPES:
            cmd, math = ESCAPES[ch]
            path = ast.path_to(span.start)
            if math and not _in_math(path + (path[-1],)):
                rep = f"${cmd}$"
            elif cmd and cmd[-1].isalpha() and doc.text[span.end : span.end + 1].isalpha():
                rep = cmd + "{}"
            else:
                rep = cmd
            options.append(_candidate("R6-encoding", f"replace {ch} with {rep}", Edit.replace(doc, span.start, span.end, rep)))
    elif diag.pattern == "encoding-unavailable":
        options.append(_candidate("R6-encoding", "load the T1 font encoding", preamble_insertion(ast, "\\usepackage[T1]{fontenc}")))
    elif diag.pattern == "invalid-utf8":
        raw = doc.text[span.start : span.end]
        if raw and 0xDC80 <= ord(raw) <= 0xDCFF:
            fixed = bytes([ord(raw) - 0xDC00]).decode("latin-1")
            options.append(_candidate("R6-encoding", f"re-encode the byte as {fixed}", Edit.replace(doc, span.start, span.end, fixed)))
    elif diag.pattern == "encoding-unknown":
        node = node_path(ast, diag)[-1]
        opt = next((a for a in node.args if a.arg == "o"), None) if node.kind is NodeKind.PACKAGE_DECL else None
        if opt is not None:
            inner_start = opt.span.start + 1
            for m in re.finditer(r"[^,\s]+", doc.text[inner_start : opt.span.end - 1]):
                enc = m.group(0)
                if enc in KNOWN_ENCODINGS:
                    continue
                for _, cand in nearest(enc, KNOWN_ENCODINGS, 2):
                    options.append(
                        _candidate("R6-encoding", f"use the {cand} encoding", Edit.replace(doc, inner_start + m.start(), inner_start + m.end(), cand))
                    )
                break
    option = _nth(options, attempt)
    return [option] if option else []


# -- R7 package conflicts ------------------------------------------------------------


def _decls(ast: Ast, name: str) -> list[AstNode]:
    return [n for n in ast.package_decls if name in n.keys]


def _drop_package(ast: Ast, node: AstNode, name: str) -> Edit:
    doc = ast.source
    if node.keys == [name]:
        return delete_node_line(doc, node)
    spans = _key_spans(doc, node)
    start, end = spans[name]
    text = doc.text
    # swallow one separating comma
    after = re.compile(r"\s*,\s*").match(text, end)
    if after:
        return Edit.replace(doc, start, after.end(), "")
    before = text.rfind(",", 0, start)
    return Edit.replace(doc, before, end, "")


def r7_conflict(diag: Diagnostic, ast: Ast, db: PackageDb, attempt: int) -> list[FixCandidate]:
    doc = ast.source
    options: list[FixCandidate] = []
    if diag.pattern == "option-clash":
        name = diag.details.get("package", "")
        decls = _decls(ast, name)
        if len(decls) >= 2:
            options.append(_candidate("R7-conflict", f"load {name} only once", _drop_package(ast, decls[-1], name)))
    elif diag.pattern == "package-conflict":
        a, b = diag.details.get("a", ""), diag.details.get("b", "")
        da, dbs = _decls(ast, a), _decls(ast, b)
        if not da or not dbs:
            return []
        if diag.details.get("kind") == ConflictKind.ORDER_SENSITIVE.value:
            # move b directly after a
            node_b = dbs[0]
            line_b = doc.line_text(doc.line_of(node_b.span.start)).strip()
            text_b = line_b if node_b.keys == [b] and line_b == doc.text[node_b.span.start : node_b.span.end] else f"\\usepackage{{{b}}}"
            anchor = da[0]
            anchor_line = doc.line_of(max(anchor.span.end - 1, anchor.span.start))
            options.append(
                _candidate(
                    "R7-conflict",
                    f"load {b} after {a}",
                    _drop_package(ast, node_b, b),
                    Edit.insert(doc, doc.line_span(anchor_line).end, "\n" + text_b),
                )
            )
        else:
            hint = diag.details.get("hint", "")
            m = re.match(r"remove (\S+?)[;,.]?(?:\s|$)", hint)
            first = m.group(1) if m and m.group(1) in (a, b) else b
            for name in dict.fromkeys([first, b, a]):
                node = (da if name == a else dbs)[-1]
                options.append(_candidate("R7-conflict", f"remove package {name}", _drop_package(ast, node, name)))
    option = _nth(options, attempt)
    return [option] if option else []


# -- R8 tables and floats ------------------------------------------------------------


def r8_table(diag: Diagnostic, ast: Ast, db: PackageDb, attempt: int) -> list[FixCandidate]:
    doc = ast.source
    span = diag.span
    path = node_path(ast, diag)
    options: list[FixCandidate] = []
    text = doc.text
    if diag.pattern == "extra-alignment-tab":
        if text[span.start : span.end] == "&":
            end = span.end + 1 if text[span.end : span.end + 1] == " " else span.end
            options.append(_candidate("R8-table", "remove the extra &", Edit.replace(doc, span.start, end, "")))
        env = next((p for p in reversed(path) if p.begin is not None and p.name in TABULAR_ENVIRONMENTS), None)
        checker = _Checker(ast, db)
        spec = checker.column_spec(env) if env is not None else None
        if spec is not None and not spec.is_error:
            ncols, _ = checker.count_columns(spec.inner_text())
            widest = max((1 + sum(w for _, w in row) for row in checker.rows(env)), default=ncols)
            missing = max(1, widest - ncols)
            for letter in "cl":
                options.append(
                    _candidate("R8-table", f"add {missing} {letter} column(s)", Edit.insert(doc, spec.span.end - 1, letter * missing))
                )
    elif diag.pattern == "illegal-array-arg":
        spec = text[span.start + 1 : span.end - 1]
        checker = _Checker(ast, db)
        _, bad = checker.count_columns(spec)
        if bad is not None:
            at = span.start + 1 + spec.index(bad)
            for letter in "clr":
                options.append(_candidate("R8-table", f"replace column type {bad} with {letter}", Edit.replace(doc, at, at + 1, letter)))
    elif diag.pattern == "misplaced-alignment-tab" and text[span.start : span.end] == "&":
        options.append(_candidate("R8-table", "escape the ampersand", Edit.replace(doc, span.start, span.end, "\\&")))
    elif diag.pattern == "float-option":
        opt = text[span.start + 1 : span.end - 1]
        good = "".join(c for c in opt if c in "htbp!") or "htbp"
        options.append(_candidate("R8-table", f"use placement [{good}]", Edit.replace(doc, span.start, span.end, f"[{good}]")))
    elif diag.pattern in ("not-outer-par", "float-lost"):
        env = next((p for p in reversed(path) if p.begin is not None and p.begin.span == span), None)
        end = _end_of(env) if env is not None else None
        if env is not None and end is not None:
            head_end = max([a.span.end for a in env.args if a.arg == "o"] + [env.begin.span.end])
            options.append(
                _candidate(
                    "R8-table",
                    f"unwrap the nested {env.name}",
                    Edit.replace(doc, env.begin.span.start, head_end, ""),
                    Edit.replace(doc, end.span.start, end.span.end, ""),
                )
            )
    option = _nth(options, attempt)
    return [option] if option else []


RULES: dict[str, Callable[[Diagnostic, Ast, PackageDb, int], list[FixCandidate]]] = {
    "missing-package-env": r1_missing_package,
    "missing-package-cmd": r1_missing_package,
    "missing-dollar": r2_math,
    "display-math": r2_math,
    "extra-brace": r2_math,
    "bad-math-delimiter": r2_math,
    "env-mismatch": r3_environment,
    "undefined-cs": r4_typo,
    "env-undefined": r4_typo,
    "file-not-found": r4_typo,
    "citation-undefined": r5_reference,
    "reference-undefined": r5_reference,
    "unicode-char": r6_encoding,
    "encoding-unavailable": r6_encoding,
    "invalid-utf8": r6_encoding,
    "encoding-unknown": r6_encoding,
    "option-clash": r7_conflict,
    "package-conflict": r7_conflict,
    "extra-alignment-tab": r8_table,
    "illegal-array-arg": r8_table,
    "misplaced-alignment-tab": r8_table,
    "float-option": r8_table,
    "not-outer-par": r8_table,
    "float-lost": r8_table,
}

# rules allowed to edit the preamble regardless of where the diagnostic is
PREAMBLE_RULES = frozenset({"R1-missing-package", "R6-encoding", "R7-conflict"})


class RuleProvider:
    """The deterministic rule catalog as a suggestion provider."""

    id = PROVIDER_ID

    def suggest(self, diag: Diagnostic, ast: Ast, db: PackageDb, attempt: int) -> list[FixCandidate]:
        rule = RULES.get(diag.pattern)
        if rule is None or not 1 <= attempt <= 3:
            return []
        return rule(diag, ast, db, attempt)


def suggest_rule_based(diag: Diagnostic, ast: Ast, db: PackageDb, attempt: int) -> list[FixCandidate]:
    return RuleProvider().suggest(diag, ast, db, attempt)
