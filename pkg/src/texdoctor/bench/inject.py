"""Deterministic error injection into clean seed documents."""

from __future__ import annotations

import random
import re
from collections.abc import Callable, Iterator
from dataclasses import dataclass
from pathlib import PurePath

from ..latex import Ast, AstNode, NodeKind, SourceDocument, Span, parse
from ..localize import CATEGORY_ABBREV, ErrorCategory
from ..packagedb import ConflictKind, PackageDb, SymbolKind, default_db


class NotInjectable(ValueError):
    """The seed lacks the material a mutation family needs."""


@dataclass(frozen=True)
class Mutation:
    rule: str
    start: int
    end: int
    replacement: str
    # offset in the seed of the construct the error should be reported at;
    # None means the injection site itself
    truth: int | None = None


@dataclass(frozen=True)
class BenchCase:
    id: str
    seed_doc: SourceDocument
    broken_doc: SourceDocument
    category: ErrorCategory
    injection_span: Span
    injection_rule: str
    rng_seed: int
    # line of broken_doc a correct diagnostic must touch
    truth_line: int

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "seed": self.seed_doc.path,
            "category": self.category.value,
            "injection_span": {"start": self.injection_span.start, "end": self.injection_span.end},
            "injection_rule": self.injection_rule,
            "rng_seed": self.rng_seed,
            "truth_line": self.truth_line,
        }


# commands whose renaming would turn the case into another category
_NOT_RENAMED = frozenset(
    "begin end item label ref eqref cite citep citet bibitem usepackage documentclass newcommand "
    "caption centering maketitle".split()
)
ILLEGAL_SPEC_LETTERS = "qwyzk"
UNSUPPORTED_CHARS = "α≤→∞βλ"
BAD_ENCODINGS = ("T9", "T7", "TT")
SCOPE_ENVIRONMENTS = ("itemize", "enumerate", "table", "figure", "tabular", "align", "equation", "algorithm")


def _body_paths(ast: Ast) -> Iterator[tuple[AstNode, ...]]:
    for path in ast.paths[1:]:
        if path[-1].span.start >= ast.preamble_end:
            yield path


def _in_math_or_arg(path: tuple[AstNode, ...]) -> bool:
    for n in path[:-1]:
        if n.kind in (NodeKind.MATH_INLINE, NodeKind.MATH_DISPLAY) or n.arg is not None:
            return True
        if n.begin is not None and n.name in ("align", "align*", "equation", "equation*"):
            return True
    return False


def _whole_line(doc: SourceDocument, node: AstNode) -> tuple[int, int]:
    start, end = doc.line_bounds(doc.line_of(node.span.start))
    return start, end


def _word_variants(word: str, rng: random.Random) -> Iterator[str]:
    """Random single edits of ``word`` (swap, drop, double), in random order."""
    ops = []
    for i in range(len(word)):
        ops.append(("drop", i))
        ops.append(("dup", i))
        if i + 1 < len(word) and word[i] != word[i + 1]:
            ops.append(("swap", i))
    rng.shuffle(ops)
    for op, i in ops:
        if op == "drop":
            yield word[:i] + word[i + 1 :]
        elif op == "dup":
            yield word[: i + 1] + word[i] + word[i + 1 :]
        else:
            yield word[:i] + word[i + 1] + word[i] + word[i + 2 :]


# -- per-category mutation families ------------------------------------------


def _undefined_control(doc: SourceDocument, ast: Ast, db: PackageDb, rng: random.Random) -> list[Mutation]:
    known = db.all_symbols(SymbolKind.COMMAND) | set(ast.macros)
    out: list[Mutation] = []
    cmds = [
        p[-1]
        for p in _body_paths(ast)
        if p[-1].kind is NodeKind.COMMAND
        and (p[-1].name or "").isalpha()
        and len(p[-1].name) >= 3
        and p[-1].name not in _NOT_RENAMED
        and p[-1].name in known
    ]
    for node in rng.sample(cmds, min(len(cmds), 8)):
        for variant in _word_variants(node.name, rng):
            if len(variant) >= 2 and variant.isalpha() and variant not in known:
                s = node.span.start + 1
                out.append(Mutation("rename-command", s, s + len(node.name), variant))
                break
    # deleting a user macro definition leaves its uses undefined
    for node in ast.nodes:
        if node.kind is NodeKind.COMMAND and node.name == "newcommand" and node.span.start < ast.preamble_end:
            m = re.compile(r"\\newcommand\s*\{?\\([A-Za-z]+)").match(doc.text, node.span.start)
            if not m:
                continue
            name = m.group(1)
            uses = [p[-1] for p in _body_paths(ast) if p[-1].kind is NodeKind.COMMAND and p[-1].name == name]
            if uses and name not in db.all_symbols(SymbolKind.COMMAND):
                start, end = _whole_line(doc, node)
                out.append(Mutation("delete-newcommand", start, end, "", truth=uses[0].span.start))
    return out


def _math_mode(doc: SourceDocument, ast: Ast, db: PackageDb, rng: random.Random) -> list[Mutation]:
    out: list[Mutation] = []
    text = doc.text
    for path in _body_paths(ast):
        node = path[-1]
        if node.kind is NodeKind.MATH_INLINE and node.name == "$" and "\n" not in text[node.span.start : node.span.end]:
            if _in_math_or_arg(path):
                continue
            # only the last formula of a paragraph, so the remaining $ still pair up
            stop = re.compile(r"\n[ \t]*\n").search(text, node.span.end)
            rest = text[node.span.end : stop.start() if stop else len(text)]
            if "$" in rest:
                continue
            out.append(Mutation("drop-closing-dollar", node.span.end - 1, node.span.end, "", truth=node.span.start))
            out.append(Mutation("drop-opening-dollar", node.span.start, node.span.start + 1, ""))
        elif node.begin is not None and node.name in ("align", "align*"):
            end = node.children[-1]
            if end.kind is NodeKind.COMMAND and end.name == "end":
                inner = next(a for a in end.args if a.arg == "m")
                out.append(Mutation("swap-align-end", inner.span.start + 1, inner.span.end - 1, "aligned"))
    return out


def _package_conflict(doc: SourceDocument, ast: Ast, db: PackageDb, rng: random.Random) -> list[Mutation]:
    out: list[Mutation] = []
    loaded = [p.name for p in ast.packages]
    body = list(_body_paths(ast))
    for decl in ast.package_decls:
        if len(decl.keys) != 1 or decl.keys[0] not in db:
            continue
        name = decl.keys[0]
        rest = [p for p in loaded if p != name]
        first_use = None
        for path in body:
            n = path[-1]
            if n.kind in (NodeKind.COMMAND, NodeKind.CITE_REF) and (n.macro or n.name):
                kind, sym = SymbolKind.COMMAND, (n.macro or n.name)
            elif n.begin is not None and n.name:
                kind, sym = SymbolKind.ENVIRONMENT, n.name
            else:
                continue
            if sym in ast.macros or sym == "begin" or sym == "end":
                continue
            if db.records[name].provides(kind, sym) and not db.available(kind, sym, rest):
                first_use = n.span.start
                break
        if first_use is not None:
            start, end = _whole_line(doc, decl)
            out.append(Mutation("delete-usepackage", start, end, "", truth=first_use))
    if ast.package_decls:
        last = ast.package_decls[-1]
        at = _whole_line(doc, last)[1]
        for rule in db.conflicts:
            if rule.kind is not ConflictKind.INCOMPATIBLE:
                continue
            for have, other in ((rule.a, rule.b), (rule.b, rule.a)):
                if have in loaded and other not in loaded:
                    out.append(Mutation("insert-conflicting-package", at, at, f"\\usepackage{{{other}}}\n"))
    return out


def _rows(doc: SourceDocument, env: AstNode) -> list[int]:
    """Line numbers of data rows (lines with ``&`` ending in ``\\\\``) of a tabular."""
    first = doc.line_of(env.span.start)
    last = doc.line_of(env.span.end - 1)
    return [ln for ln in range(first + 1, last) if "&" in doc.line_text(ln) and doc.line_text(ln).rstrip().endswith("\\\\")]


def _table_figure(doc: SourceDocument, ast: Ast, db: PackageDb, rng: random.Random) -> list[Mutation]:
    out: list[Mutation] = []
    for path in _body_paths(ast):
        env = path[-1]
        if env.begin is None or env.name != "tabular":
            continue
        for ln in _rows(doc, env):
            start, _ = doc.line_bounds(ln)
            line = doc.line_text(ln)
            cells = [m.end() for m in re.finditer(r"&\s*", line)]
            at = start + rng.choice(cells)
            out.append(Mutation("extra-ampersand", at, at, "& "))
        spec = next((a for a in env.args if a.arg == "m"), None)
        if spec is not None:
            inner = doc.text[spec.span.start + 1 : spec.span.end - 1]
            positions = [i for i, c in enumerate(inner) if c in "lcr"]
            if positions:
                i = rng.choice(positions)
                at = spec.span.start + 1 + i
                out.append(Mutation("corrupt-column-spec", at, at + 1, rng.choice(ILLEGAL_SPEC_LETTERS)))
    return out


def _corrupt_key(key: str, existing: set[str], rng: random.Random) -> str | None:
    for variant in _word_variants(key, rng):
        if variant and variant not in existing and "," not in variant:
            return variant
    return None


def _reference(doc: SourceDocument, ast: Ast, db: PackageDb, rng: random.Random) -> list[Mutation]:
    out: list[Mutation] = []
    labels = {k for n in ast.nodes if n.kind is NodeKind.LABEL_REF and n.macro == "label" for k in n.keys}
    bib = {k for n in ast.nodes if n.kind is NodeKind.CITE_REF and n.macro == "bibitem" for k in n.keys}
    for path in _body_paths(ast):
        n = path[-1]
        if n.kind is NodeKind.CITE_REF and n.macro in ("cite", "citep", "citet"):
            existing, rule = bib, "corrupt-cite-key"
        elif n.kind is NodeKind.LABEL_REF and n.macro in ("ref", "eqref"):
            existing, rule = labels, "corrupt-ref-key"
        else:
            continue
        if len(n.keys) != 1:
            continue
        key = n.keys[0]
        at = doc.text.find(key, n.span.start, n.span.end)
        bad = _corrupt_key(key, existing | labels | bib, rng)
        if at >= 0 and bad:
            out.append(Mutation(rule, at, at + len(key), bad))
    return out


def _encoding(doc: SourceDocument, ast: Ast, db: PackageDb, rng: random.Random) -> list[Mutation]:
    out: list[Mutation] = []
    # documents declaring an input encoding or using a Unicode engine are left alone
    if not any(p.name in ("inputenc", "fontspec") for p in ast.packages):
        for path in _body_paths(ast):
            n = path[-1]
            if n.kind is not NodeKind.TEXT or _in_math_or_arg(path) or len(path) < 2:
                continue
            if path[-2].kind is not NodeKind.ENVIRONMENT or path[-2].name != "document":
                continue
            raw = n.parts[0] if n.parts else ""
            for m in re.finditer(r"(?<= )(?=[a-z])", raw):
                line = doc.line_text(doc.line_of(n.span.start + m.start()))
                if line.startswith("The "):
                    out.append(Mutation("insert-unicode-char", n.span.start + m.start(), n.span.start + m.start(), rng.choice(UNSUPPORTED_CHARS) + " "))
    for decl in ast.package_decls:
        if decl.keys == ["fontenc"]:
            opt = next((a for a in decl.args if a.arg == "o"), None)
            if opt is not None:
                inner = doc.text[opt.span.start + 1 : opt.span.end - 1]
                m = re.search(r"\bT1\b", inner)
                if m:
                    at = opt.span.start + 1 + m.start()
                    out.append(Mutation("corrupt-fontenc-option", at, at + 2, rng.choice(BAD_ENCODINGS)))
    return out


FAMILIES: dict[ErrorCategory, Callable[[SourceDocument, Ast, PackageDb, random.Random], list[Mutation]]] = {
    ErrorCategory.UNDEFINED_CONTROL: _undefined_control,
    ErrorCategory.MATH_MODE: _math_mode,
    ErrorCategory.PACKAGE_CONFLICT: _package_conflict,
    ErrorCategory.TABLE_FIGURE: _table_figure,
    ErrorCategory.REFERENCE_ERROR: _reference,
    ErrorCategory.ENCODING_FONT: _encoding,
}


def _seed_name(seed: SourceDocument) -> str:
    return PurePath(seed.path).name


def _apply(seed: SourceDocument, category: ErrorCategory, rng_seed: int, m: Mutation, case_id: str | None) -> BenchCase:
    text = seed.text[: m.start] + m.replacement + seed.text[m.end :]
    broken = SourceDocument(text, seed.path)
    span = broken.span(m.start, m.start + len(m.replacement))
    truth = m.start
    if m.truth is not None:
        truth = m.truth
        if truth >= m.end:
            truth += len(m.replacement) - (m.end - m.start)
    truth_line = broken.line_of(min(truth, len(text)))
    abbrev = CATEGORY_ABBREV[category]
    return BenchCase(
        case_id or f"{abbrev}-{_seed_name(seed)}-{rng_seed}",
        seed, broken, category, span, m.rule, rng_seed, truth_line,
    )


def _check_seed(seed: SourceDocument) -> Ast:
    ast = parse(seed)
    if ast.recovery_count:
        raise NotInjectable(f"{_seed_name(seed)} does not parse cleanly")
    return ast


def inject(
    seed: SourceDocument,
    category: ErrorCategory,
    rng_seed: int,
    db: PackageDb | None = None,
    case_id: str | None = None,
) -> BenchCase:
    """Inject one error of ``category``; deterministic in (seed, category, rng_seed)."""
    db = db or default_db()
    ast = _check_seed(seed)
    rng = random.Random(f"{_seed_name(seed)}|{category.value}|{rng_seed}")
    options = FAMILIES[category](seed, ast, db, rng)
    if not options:
        raise NotInjectable(f"{_seed_name(seed)} has no material for {category.value}")
    # pick a family first so frequent sites do not crowd out rarer mutation kinds
    rules = sorted({m.rule for m in options})
    rule = rng.choice(rules)
    m = rng.choice([o for o in options if o.rule == rule])
    return _apply(seed, category, rng_seed, m, case_id)


def inject_unclosed_environment(seed: SourceDocument, rng_seed: int, case_id: str | None = None) -> BenchCase:
    """Delete the ``\\end`` line of one environment; ground truth is its ``\\begin`` line."""
    ast = _check_seed(seed)
    rng = random.Random(f"{_seed_name(seed)}|unclosed|{rng_seed}")
    doc = seed
    options = []
    for path in _body_paths(ast):
        env = path[-1]
        if env.begin is None or env.name not in SCOPE_ENVIRONMENTS:
            continue
        end = env.children[-1]
        if end.kind is not NodeKind.COMMAND or end.name != "end":
            continue
        start, stop = _whole_line(doc, end)
        if doc.text[start:stop].strip() != doc.text[end.span.start : end.span.end]:
            continue
        options.append(Mutation("delete-end", start, stop, "", truth=env.span.start))
    if not options:
        raise NotInjectable(f"{_seed_name(seed)} has no environment to unclose")
    m = rng.choice(options)
    cat = ErrorCategory.TABLE_FIGURE if _env_name(doc, m) in ("table", "figure", "tabular") else ErrorCategory.MATH_MODE
    return _apply(seed, cat, rng_seed, m, case_id)


def _env_name(doc: SourceDocument, m: Mutation) -> str:
    found = re.compile(r"\\end\{([^}]*)\}").search(doc.text, m.start, m.end)
    return found.group(1) if found else ""
