"""Fuse log records, the AST and the package database into diagnostics."""

from __future__ import annotations

import enum
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace
from types import MappingProxyType

from .checks import (
    ALIGNMENT_ENVIRONMENTS,
    BOX_COMMANDS,
    BOX_ENVIRONMENTS,
    FLOAT_ENVIRONMENTS,
    INNER_MATH_ENVIRONMENTS,
    LITERAL_ARG_COMMANDS,
    MATH_ONLY_COMMANDS,
    T1_ONLY,
    TABULAR_ENVIRONMENTS,
    _Checker,
)
from .latex import Ast, AstNode, ErrorKind, NodeKind, SourceDocument, Span, parse
from .latex.nodes import MATH_ENVIRONMENTS
from .log import LogRecord, LogReport, Severity
from .packagedb import ConflictRule, PackageDb, SymbolKind, default_db


class ErrorCategory(str, enum.Enum):
    UNDEFINED_CONTROL = "UndefinedControl"
    MATH_MODE = "MathMode"
    PACKAGE_CONFLICT = "PackageConflict"
    TABLE_FIGURE = "TableFigure"
    REFERENCE_ERROR = "ReferenceError"
    ENCODING_FONT = "EncodingFont"


# row order of the benchmark taxonomy
CATEGORY_ORDER: tuple[ErrorCategory, ...] = tuple(ErrorCategory)

# evaluated first to last when several rules apply to one record
PRECEDENCE: tuple[ErrorCategory, ...] = (
    ErrorCategory.PACKAGE_CONFLICT,
    ErrorCategory.TABLE_FIGURE,
    ErrorCategory.MATH_MODE,
    ErrorCategory.UNDEFINED_CONTROL,
    ErrorCategory.REFERENCE_ERROR,
    ErrorCategory.ENCODING_FONT,
)

CATEGORY_ABBREV = {
    ErrorCategory.UNDEFINED_CONTROL: "UND",
    ErrorCategory.MATH_MODE: "MATH",
    ErrorCategory.PACKAGE_CONFLICT: "PKG",
    ErrorCategory.TABLE_FIGURE: "TAB",
    ErrorCategory.REFERENCE_ERROR: "REF",
    ErrorCategory.ENCODING_FONT: "ENC",
    None: "UNK",
}


class Confidence(str, enum.Enum):
    HIGH = "High"
    MEDIUM = "Medium"
    LOW = "Low"


class Unclassifiable(ValueError):
    pass


class NoLocation(ValueError):
    pass


WINDOWS = (0, 5, 20)

TABLE_FIGURE_PATTERNS = frozenset(
    {"extra-alignment-tab", "misplaced-alignment-tab", "illegal-array-arg", "not-outer-par", "float-option", "float-lost"}
)
MATH_PATTERNS = frozenset({"missing-dollar", "display-math", "extra-brace", "bad-math-delimiter"})
ENCODING_PATTERNS = frozenset(
    {"unicode-char", "invalid-utf8", "font-not-loadable", "encoding-unknown", "encoding-unavailable"}
)
GRAPHICS_EXTENSIONS = (".png", ".pdf", ".jpg", ".jpeg", ".eps", ".svg")

# every (category, pattern) pair diagnose can produce; the template catalog must cover all of them
DIAGNOSTIC_KEYS: frozenset[tuple[ErrorCategory | None, str]] = frozenset(
    {
        (ErrorCategory.PACKAGE_CONFLICT, "missing-package-env"),
        (ErrorCategory.PACKAGE_CONFLICT, "missing-package-cmd"),
        (ErrorCategory.PACKAGE_CONFLICT, "env-undefined"),
        (ErrorCategory.PACKAGE_CONFLICT, "file-not-found"),
        (ErrorCategory.PACKAGE_CONFLICT, "option-clash"),
        (ErrorCategory.PACKAGE_CONFLICT, "already-defined"),
        (ErrorCategory.PACKAGE_CONFLICT, "package-conflict"),
        (ErrorCategory.UNDEFINED_CONTROL, "undefined-cs"),
        (ErrorCategory.MATH_MODE, "missing-dollar"),
        (ErrorCategory.MATH_MODE, "display-math"),
        (ErrorCategory.MATH_MODE, "extra-brace"),
        (ErrorCategory.MATH_MODE, "bad-math-delimiter"),
        (ErrorCategory.MATH_MODE, "env-mismatch"),
        (ErrorCategory.TABLE_FIGURE, "env-mismatch"),
        (ErrorCategory.TABLE_FIGURE, "extra-alignment-tab"),
        (ErrorCategory.TABLE_FIGURE, "misplaced-alignment-tab"),
        (ErrorCategory.TABLE_FIGURE, "illegal-array-arg"),
        (ErrorCategory.TABLE_FIGURE, "not-outer-par"),
        (ErrorCategory.TABLE_FIGURE, "float-option"),
        (ErrorCategory.TABLE_FIGURE, "float-lost"),
        (ErrorCategory.TABLE_FIGURE, "graphics-not-found"),
        (ErrorCategory.REFERENCE_ERROR, "citation-undefined"),
        (ErrorCategory.REFERENCE_ERROR, "reference-undefined"),
        (ErrorCategory.ENCODING_FONT, "unicode-char"),
        (ErrorCategory.ENCODING_FONT, "invalid-utf8"),
        (ErrorCategory.ENCODING_FONT, "font-not-loadable"),
        (ErrorCategory.ENCODING_FONT, "encoding-unknown"),
        (ErrorCategory.ENCODING_FONT, "encoding-unavailable"),
        (None, "unclassified"),
    }
)


@dataclass(frozen=True)
class Evidence:
    records: tuple[int, ...]
    nodes: tuple[str, ...] = ()

    def merge(self, other: Evidence) -> Evidence:
        return Evidence(
            tuple(sorted(set(self.records) | set(other.records))),
            tuple(dict.fromkeys(self.nodes + other.nodes)),
        )


@dataclass(frozen=True)
class Localization:
    span: Span
    confidence: Confidence
    path: tuple[AstNode, ...] = ()
    no_location: bool = False


@dataclass(frozen=True, eq=False)
class Diagnostic:
    id: str
    category: ErrorCategory | None
    span: Span
    reported_line: int | None
    message: str
    evidence: Evidence
    confidence: Confidence
    pattern: str
    token: str | None = None
    record: LogRecord | None = None
    # interpolation values for the explanation templates and fix rules
    details: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.message:
            raise ValueError("diagnostic message must be non-empty")
        if not self.evidence.records:
            raise ValueError("diagnostic evidence must be non-empty")
        object.__setattr__(self, "details", MappingProxyType(dict(self.details)))

    @property
    def line(self) -> int:
        return self.span.line

    @property
    def key(self) -> tuple[ErrorCategory | None, int, int]:
        return (self.category, self.span.start, self.span.end)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "category": self.category.value if self.category else None,
            "pattern": self.pattern,
            "line": self.line,
            "reported_line": self.reported_line,
            "span": {"start": self.span.start, "end": self.span.end},
            "message": self.message,
            "confidence": self.confidence.value,
            "token": self.token,
            "evidence": {"records": list(self.evidence.records), "nodes": list(self.evidence.nodes)},
        }


# -- helpers ---------------------------------------------------------------


def describe_path(path: Iterable[AstNode]) -> str:
    parts = []
    for node in path:
        if node.name is None and node.kind is NodeKind.GROUP and not node.arg:
            parts.append("root" if not parts else "Group")
            continue
        label = node.kind.value
        if node.error:
            label += f"[{node.error.value}]"
        parts.append(f"{label}({node.name})" if node.name else label)
    return "/".join(parts)


def _loaded(ast: Ast) -> list[str]:
    return [p.name for p in ast.packages]


def missing_providers(kind: SymbolKind, name: str, ast: Ast, db: PackageDb) -> list[str]:
    """Ranked providers of ``name`` when none of them is loaded; ``[]`` otherwise."""
    if not name:
        return []
    base = name.rstrip("*") if kind is SymbolKind.COMMAND else name
    if base in ast.macros or (kind is SymbolKind.ENVIRONMENT and base in ast.environments):
        return []
    if db.available(kind, base, _loaded(ast)):
        return []
    return [r.name for r in db.provider_of(kind, base)]


def conflict_for(record: LogRecord, ast: Ast, db: PackageDb) -> ConflictRule | None:
    if not record.package:
        return None
    loaded = _loaded(ast)
    for rule in db.conflicts_in(loaded):
        if record.package in (rule.a, rule.b):
            return rule
    return None


def _env_mismatch_category(record: LogRecord) -> ErrorCategory:
    names = {record.token or ""} | ({record.extra[-1]} if record.extra else set())
    table_like = FLOAT_ENVIRONMENTS | TABULAR_ENVIRONMENTS
    if names & table_like and not names & (MATH_ENVIRONMENTS | INNER_MATH_ENVIRONMENTS):
        return ErrorCategory.TABLE_FIGURE
    return ErrorCategory.MATH_MODE


def _candidates(record: LogRecord, ast: Ast, db: PackageDb) -> dict[ErrorCategory, str]:
    """Every category whose rule matches, with the refined pattern id."""
    p = record.pattern
    out: dict[ErrorCategory, str] = {}
    if p == "undefined-cs":
        if missing_providers(SymbolKind.COMMAND, record.token or "", ast, db):
            out[ErrorCategory.PACKAGE_CONFLICT] = "missing-package-cmd"
        out[ErrorCategory.UNDEFINED_CONTROL] = "undefined-cs"
    elif p == "env-undefined":
        has = missing_providers(SymbolKind.ENVIRONMENT, record.token or "", ast, db)
        out[ErrorCategory.PACKAGE_CONFLICT] = "missing-package-env" if has else "env-undefined"
    elif p == "file-not-found":
        token = (record.token or "").lower()
        if token.endswith((".sty", ".cls")):
            out[ErrorCategory.PACKAGE_CONFLICT] = "file-not-found"
        elif token.endswith(GRAPHICS_EXTENSIONS) or "includegraphics" in record.raw_excerpt:
            out[ErrorCategory.TABLE_FIGURE] = "graphics-not-found"
    elif p in ("option-clash", "already-defined"):
        out[ErrorCategory.PACKAGE_CONFLICT] = p
    elif p == "package-error":
        if conflict_for(record, ast, db):
            out[ErrorCategory.PACKAGE_CONFLICT] = "package-conflict"
    elif p in TABLE_FIGURE_PATTERNS:
        out[ErrorCategory.TABLE_FIGURE] = p
    elif p in MATH_PATTERNS:
        out[ErrorCategory.MATH_MODE] = p
    elif p == "env-mismatch":
        out[_env_mismatch_category(record)] = p
    elif p in ("citation-undefined", "reference-undefined"):
        out[ErrorCategory.REFERENCE_ERROR] = p
    elif p in ENCODING_PATTERNS:
        out[ErrorCategory.ENCODING_FONT] = p
    return out


def classify_pattern(record: LogRecord, ast: Ast, db: PackageDb) -> tuple[ErrorCategory, str]:
    found = _candidates(record, ast, db)
    for cat in PRECEDENCE:
        if cat in found:
            return cat, found[cat]
    raise Unclassifiable(record.message)


def classify(record: LogRecord, ast: Ast, db: PackageDb) -> ErrorCategory:
    """Category of a record; raises Unclassifiable when no rule matches."""
    return classify_pattern(record, ast, db)[0]


# -- localization ----------------------------------------------------------


def _in_math(path: tuple[AstNode, ...]) -> bool:
    for n in path[:-1]:
        if n.kind in (NodeKind.MATH_INLINE, NodeKind.MATH_DISPLAY) or n.error is ErrorKind.UNTERMINATED_MATH:
            return True
        if n.begin is not None and (n.name in MATH_ENVIRONMENTS or n.name in INNER_MATH_ENVIRONMENTS):
            return True
    return False


def _in_literal(path: tuple[AstNode, ...]) -> bool:
    for parent, child in zip(path, path[1:]):
        if child.arg is None:
            continue
        if parent.kind in (NodeKind.CITE_REF, NodeKind.LABEL_REF, NodeKind.PACKAGE_DECL, NodeKind.DOCUMENT_CLASS_DECL):
            return True
        if parent.kind is NodeKind.COMMAND and (parent.name or "").rstrip("*") in LITERAL_ARG_COMMANDS:
            return True
        if parent.kind is not NodeKind.COMMAND and parent.kind is not NodeKind.GROUP:
            return True
    return False


def _raw(node: AstNode) -> str:
    return node.parts[0] if node.parts and isinstance(node.parts[0], str) else ""


class _Localizer:
    def __init__(self, ast: Ast, db: PackageDb) -> None:
        self.ast = ast
        self.db = db
        self.doc = ast.source

    # each finder returns (span, path) pairs within the line range
    def finder(self, record: LogRecord):
        return getattr(self, "find_" + record.pattern.replace("-", "_"), None)

    def find_undefined_cs(self, rec: LogRecord, paths):
        token = (rec.token or "").rstrip("*")
        for path in paths:
            n = path[-1]
            name = (n.macro or n.name or "").rstrip("*") if n.kind is not NodeKind.TEXT else None
            if n.kind in (NodeKind.COMMAND, NodeKind.CITE_REF, NodeKind.LABEL_REF, NodeKind.PACKAGE_DECL) and name == token:
                yield n.span, path

    def find_env_undefined(self, rec: LogRecord, paths):
        for path in paths:
            n = path[-1]
            if n.begin is not None and n.name == rec.token:
                yield n.begin.span, path + (n.begin,)

    def find_file_not_found(self, rec: LogRecord, paths):
        pkg = rec.package or re.sub(r"\.(sty|cls)$", "", rec.token or "")
        for path in paths:
            n = path[-1]
            if n.kind in (NodeKind.PACKAGE_DECL, NodeKind.DOCUMENT_CLASS_DECL) and pkg in n.keys:
                yield n.span, path
            elif n.kind is NodeKind.COMMAND and n.name == "includegraphics" and rec.token:
                stem = rec.token.rsplit(".", 1)[0]
                if any(stem in a.inner_text() for a in n.args if a.arg == "m"):
                    yield n.span, path

    def find_math(self, rec: LogRecord, paths):
        errors, tokens = [], []
        for path in paths:
            n = path[-1]
            if n.error in (ErrorKind.UNTERMINATED_MATH, ErrorKind.STRAY_DOLLAR, ErrorKind.UNMATCHED_MATH_DELIMITER):
                errors.append((n.span, path))
            elif _in_math(path) or _in_literal(path):
                continue
            elif n.kind is NodeKind.COMMAND and (n.name or "") in MATH_ONLY_COMMANDS:
                tokens.append((n.span, path))
            elif n.kind is NodeKind.TEXT:
                raw = _raw(n)
                m = re.search(r"[\^_]", raw)
                if m:
                    at = n.span.start + m.start()
                    tokens.append((self.doc.span(at, at + 1), path))
        return errors + tokens

    find_missing_dollar = find_display_math = find_extra_brace = find_bad_math_delimiter = find_math

    def find_extra_alignment_tab(self, rec: LogRecord, paths):
        checker = _Checker(self.ast, self.db)
        seen = set()
        for path in paths:
            for depth in range(len(path) - 1, -1, -1):
                env = path[depth]
                if env.begin is not None and env.name in TABULAR_ENVIRONMENTS and id(env) not in seen:
                    seen.add(id(env))
                    spec = checker.column_spec(env)
                    if spec is None:
                        continue
                    ncols, bad = checker.count_columns(spec.inner_text())
                    rows = [r for r in checker.rows(env) if r]
                    excess = []
                    for row in rows:
                        cells = 1
                        for offset, width in row:
                            cells += width
                            if cells > ncols and offset >= 0:
                                excess.append(offset)
                                break
                    env_path = path[: depth + 1]
                    # every row too wide: the column specification is the culprit,
                    # unless it is already reported as illegal
                    if excess and len(excess) == len(rows) and len(rows) > 1 and bad is None:
                        yield spec.span, env_path + (spec,)
                    else:
                        for off in excess:
                            yield self.doc.span(off, off + 1), env_path
                    break

    def find_misplaced_alignment_tab(self, rec: LogRecord, paths):
        for path in paths:
            n = path[-1]
            if n.kind is NodeKind.TEXT and "&" in _raw(n):
                if not any(p.begin is not None and p.name in ALIGNMENT_ENVIRONMENTS for p in path):
                    at = n.span.start + _raw(n).index("&")
                    yield self.doc.span(at, at + 1), path

    def find_illegal_array_arg(self, rec: LogRecord, paths):
        checker = _Checker(self.ast, self.db)
        for path in paths:
            n = path[-1]
            if n.begin is not None and n.name in TABULAR_ENVIRONMENTS:
                spec = checker.column_spec(n)
                if spec is not None and checker.count_columns(spec.inner_text())[1] is not None:
                    yield spec.span, path + (spec,)

    def find_not_outer_par(self, rec: LogRecord, paths):
        for path in paths:
            n = path[-1]
            if n.begin is not None and n.name in FLOAT_ENVIRONMENTS:
                boxed = any(
                    (p.begin is not None and (p.name in BOX_ENVIRONMENTS or p.name in FLOAT_ENVIRONMENTS))
                    or (p.kind is NodeKind.COMMAND and p.name in BOX_COMMANDS)
                    for p in path[:-1]
                )
                if boxed:
                    yield n.begin.span, path + (n.begin,)

    def find_float_option(self, rec: LogRecord, paths):
        for path in paths:
            n = path[-1]
            if n.begin is not None and n.name in FLOAT_ENVIRONMENTS:
                opts = [a for a in n.args if a.arg == "o"]
                if opts and (rec.token is None or rec.token in opts[0].inner_text()):
                    yield opts[0].span, path + (opts[0],)

    def find_float_lost(self, rec: LogRecord, paths):
        for path in paths:
            n = path[-1]
            if n.begin is not None and n.name in FLOAT_ENVIRONMENTS:
                yield n.begin.span, path + (n.begin,)

    def find_citation_undefined(self, rec: LogRecord, paths):
        for path in paths:
            n = path[-1]
            if n.kind is NodeKind.CITE_REF and rec.token in n.keys:
                yield n.span, path

    def find_reference_undefined(self, rec: LogRecord, paths):
        for path in paths:
            n = path[-1]
            if n.kind is NodeKind.LABEL_REF and n.macro != "label" and rec.token in n.keys:
                yield n.span, path

    def _find_chars(self, chars: set[str], commands: set[str], paths):
        for path in paths:
            n = path[-1]
            if n.kind is NodeKind.TEXT:
                raw = _raw(n)
                for i, ch in enumerate(raw):
                    if ch in chars:
                        yield self.doc.span(n.span.start + i, n.span.start + i + 1), path
                        break
            elif n.kind is NodeKind.COMMAND and n.name in commands:
                yield n.span, path

    def find_unicode_char(self, rec: LogRecord, paths):
        return self._find_chars({rec.token} if rec.token else set(), set(), paths)

    def find_encoding_unavailable(self, rec: LogRecord, paths):
        chars = {c for c, cs in T1_ONLY.items() if cs == rec.token}
        return self._find_chars(chars, {rec.token} if rec.token else set(), paths)

    def find_invalid_utf8(self, rec: LogRecord, paths):
        return self._find_chars({chr(c) for c in range(0xDC80, 0xDD00)}, set(), paths)

    def _package_decls(self, names: set[str], paths):
        for path in paths:
            n = path[-1]
            if n.kind is NodeKind.PACKAGE_DECL and names & set(n.keys):
                yield n.span, path

    def find_encoding_unknown(self, rec: LogRecord, paths):
        return self._package_decls({"fontenc"}, paths)

    def find_font_not_loadable(self, rec: LogRecord, paths):
        return self._package_decls({"fontenc"}, paths)

    def find_option_clash(self, rec: LogRecord, paths):
        found = list(self._package_decls({rec.package} if rec.package else set(), paths))
        return found[1:] + found[:1] if len(found) > 1 else found

    def find_already_defined(self, rec: LogRecord, paths):
        for path in paths:
            n = path[-1]
            if n.kind is NodeKind.COMMAND and n.name in ("newcommand", "newcommand*", "newenvironment", "DeclareMathOperator"):
                args = n.args
                if args and (args[0].name == rec.token or args[0].inner_text().strip().lstrip("\\") == rec.token):
                    yield n.span, path

    def find_package_error(self, rec: LogRecord, paths):
        rule = conflict_for(rec, self.ast, self.db)
        names = {rule.a, rule.b} if rule else ({rec.package} if rec.package else set())
        found = list(self._package_decls(names, paths))
        # the later declaration is the one that breaks the rule
        return sorted(found, key=lambda f: -f[0].start)

    def find_env_mismatch(self, rec: LogRecord, paths):
        return []

    # -- driver -----------------------------------------------------------
    def trusted_line(self, rec: LogRecord) -> int | None:
        line = rec.reported_line
        if line is None or line > self.doc.line_count:
            return None
        f = rec.file
        if f and f != "unknown" and not f.endswith((".tex", ".ltx")) and "." in f.rsplit("/", 1)[-1]:
            return None
        return line

    def env_mismatch(self, rec: LogRecord, line: int | None) -> Localization | None:
        begin_name = rec.token
        end_name = rec.extra[-1] if rec.extra else None
        begin_line = int(rec.extra[0]) if len(rec.extra) > 1 and rec.extra[0].isdigit() else None
        # an \end with the wrong name at the reported line is itself the culprit
        if line is not None and end_name:
            for path in self.ast.paths:
                n = path[-1]
                if n.error is ErrorKind.UNMATCHED_END and n.name == end_name and n.span.line == line:
                    return Localization(n.span, Confidence.HIGH, path)
        # otherwise walk the environment stack for the \begin whose balance is broken
        unclosed = [p for p in self.ast.paths if p[-1].error is ErrorKind.UNCLOSED_ENVIRONMENT and p[-1].name == begin_name]
        if begin_line is not None:
            exact = [p for p in unclosed if p[-1].span.line == begin_line]
            if exact:
                n = exact[0][-1]
                return Localization(n.begin.span if n.begin else n.span, Confidence.HIGH, exact[0])
            for p in self.ast.paths:
                n = p[-1]
                if n.begin is not None and n.name == begin_name and n.span.line == begin_line:
                    return Localization(n.begin.span, Confidence.MEDIUM, p + (n.begin,))
        if unclosed:
            target = line if line is not None else 0
            best = min(unclosed, key=lambda p: (abs(p[-1].span.line - target), p[-1].span.start))
            n = best[-1]
            return Localization(n.begin.span if n.begin else n.span, Confidence.MEDIUM, best)
        if end_name:
            for path in self.ast.paths:
                n = path[-1]
                if n.error is ErrorKind.UNMATCHED_END and n.name == end_name:
                    return Localization(n.span, Confidence.MEDIUM, path)
        return None

    def locate(self, rec: LogRecord) -> Localization:
        line = self.trusted_line(rec)
        if rec.pattern == "env-mismatch":
            found = self.env_mismatch(rec, line)
            if found is not None:
                return found
        finder = self.finder(rec)
        if finder is not None and rec.pattern != "env-mismatch":
            if line is not None:
                for w in WINDOWS:
                    lo, hi = max(1, line - w), line + w
                    hits = list(finder(rec, self.ast.paths_between(lo, hi)))
                    if hits:
                        span, path = min(hits, key=lambda h: abs(h[0].line - line) if w else 0)
                        return Localization(span, Confidence.HIGH if w == 0 else Confidence.MEDIUM, path)
            elif rec.token or rec.package:
                hits = list(finder(rec, self.ast.paths[1:]))
                if hits:
                    span, path = hits[0]
                    return Localization(span, Confidence.MEDIUM, path)
        if line is not None:
            span = self.doc.line_span(line)
            return Localization(span, Confidence.LOW, self._deepest(span))
        return Localization(self.doc.span(0, 0), Confidence.LOW, (self.ast.root,), no_location=True)

    def _deepest(self, span: Span) -> tuple[AstNode, ...]:
        paths = self.ast.locate(span.line)
        return paths[0] if paths else (self.ast.root,)


def localize_detail(record: LogRecord, ast: Ast, db: PackageDb | None = None) -> Localization:
    return _Localizer(ast, db or default_db()).locate(record)


def localize(record: LogRecord, ast: Ast, db: PackageDb | None = None, *, strict: bool = False) -> Span:
    """Span of the most plausible cause of ``record``.

    Records without a usable line or token fall back to the document start; with
    ``strict=True`` that case raises NoLocation instead.
    """
    loc = localize_detail(record, ast, db)
    if strict and loc.no_location:
        raise NoLocation(record.message)
    return loc.span


# -- fusion ----------------------------------------------------------------


def _details(record: LogRecord, cat: ErrorCategory | None, pattern: str, loc: Localization, ast: Ast, db: PackageDb) -> dict[str, str]:
    d: dict[str, str] = {"line": str(loc.span.line)}
    if record.token:
        d["token"] = record.token
    if record.package:
        d["package"] = record.package
    if pattern in ("missing-package-env", "missing-package-cmd"):
        kind = SymbolKind.ENVIRONMENT if pattern == "missing-package-env" else SymbolKind.COMMAND
        providers = missing_providers(kind, record.token or "", ast, db)
        d["package"] = providers[0]
        d["providers"] = ",".join(providers)
        d["usepackage"] = db.records[providers[0]].usepackage_line()
    elif pattern == "package-conflict":
        rule = conflict_for(record, ast, db)
        if rule:
            d.update(a=rule.a, b=rule.b, hint=rule.resolution_hint, kind=rule.kind.value)
            d["other"] = rule.b if record.package == rule.a else rule.a
    elif pattern == "env-mismatch":
        d["end"] = record.extra[-1] if record.extra else "?"
        d["begin_line"] = record.extra[0] if len(record.extra) > 1 else str(loc.span.line)
    elif pattern == "unicode-char" and record.token:
        d["codepoint"] = f"U+{ord(record.token[0]):04X}"
    elif pattern == "unclassified":
        first = record.raw_excerpt.split("\n", 1)[0].lstrip("! ").strip()
        d["raw"] = first or record.message
    return d


def _make(index: int, record: LogRecord, ast: Ast, db: PackageDb) -> Diagnostic:
    from .explain import render_message

    try:
        cat, pattern = classify_pattern(record, ast, db)
    except Unclassifiable:
        cat, pattern = None, "unclassified"
    loc = localize_detail(record, ast, db)
    details = _details(record, cat, pattern, loc, ast, db)
    message = render_message(cat, pattern, details)
    return Diagnostic(
        id="",
        category=cat,
        span=loc.span,
        reported_line=record.reported_line,
        message=message,
        evidence=Evidence((index,), (describe_path(loc.path),)),
        confidence=loc.confidence,
        pattern=pattern,
        token=record.token,
        record=record,
        details=details,
    )


def _sort_key(d: Diagnostic) -> tuple:
    cat = CATEGORY_ORDER.index(d.category) if d.category else len(CATEGORY_ORDER)
    return (d.span.start, cat, d.span.end, d.pattern)


def diagnose(doc: SourceDocument | str, log: LogReport, db: PackageDb | None = None, ast: Ast | None = None) -> list[Diagnostic]:
    """One diagnostic per actionable log error and per undefined citation/reference."""
    db = db or default_db()
    if isinstance(doc, str):
        doc = SourceDocument(doc)
    ast = ast if ast is not None and ast.source is doc else parse(doc)
    raw: list[Diagnostic] = []
    for i, rec in enumerate(log.records):
        if rec.severity is Severity.ERROR or rec.pattern in ("citation-undefined", "reference-undefined"):
            raw.append(_make(i, rec, ast, db))
    raw.sort(key=_sort_key)
    merged: dict[tuple, Diagnostic] = {}
    order: list[tuple] = []
    undefined_envs: dict[str, tuple] = {}
    for d in raw:
        if d.pattern in ("missing-package-env", "missing-package-cmd"):
            # one missing package explains all of its undefined symbols
            key: tuple = ("missing", d.details["package"])
        else:
            key = d.key
        if d.pattern in ("missing-package-env", "env-undefined") and d.token:
            undefined_envs.setdefault(d.token, key)
        elif d.pattern == "env-mismatch" and d.details.get("end") in undefined_envs:
            # the \begin of an undefined environment was skipped, so its \end mismatches
            key = undefined_envs[d.details["end"]]
        if key in merged:
            first = merged[key]
            merged[key] = replace(first, evidence=first.evidence.merge(d.evidence))
        else:
            merged[key] = d
            order.append(key)
    out = sorted((merged[k] for k in order), key=_sort_key)
    return [replace(d, id=f"{CATEGORY_ABBREV[d.category]}-L{d.line}-{d.span.start}") for d in out]


def advisories(log: LogReport) -> list[LogRecord]:
    """Box-badness records; reported but never fixed."""
    return [r for r in log.records if r.severity is Severity.BADBOX]
