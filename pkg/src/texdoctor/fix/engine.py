"""Validated repair: candidates are applied only when a static re-check accepts them."""

from __future__ import annotations

import difflib
import enum
from collections import Counter, OrderedDict
from collections.abc import Sequence
from dataclasses import dataclass, field, replace

from ..checks import static_report
from ..latex import Ast, PatchError, SourceDocument, apply_patch, parse
from ..localize import Diagnostic, diagnose
from ..packagedb import PackageDb, default_db
from .base import FixCandidate, SuggestionProvider
from .rules import PREAMBLE_RULES, RuleProvider

MAX_ATTEMPTS = 3


class Reason(str, enum.Enum):
    OK = "Ok"
    PARSE_REGRESSION = "ParseRegression"
    DIAGNOSTIC_PERSISTS = "DiagnosticPersists"
    OUT_OF_SCOPE = "OutOfScopeEdit"
    NEW_DIAGNOSTIC = "NewDiagnostic"
    BAD_PATCH = "BadPatch"


class RepairStatus(str, enum.Enum):
    FIXED = "Fixed"
    UNFIXABLE = "Unfixable"
    NO_CANDIDATES = "NoCandidates"


@dataclass(frozen=True)
class Validation:
    valid: bool
    reason: Reason
    detail: str = ""


@dataclass(frozen=True)
class AttemptRecord:
    attempt: int
    provider_id: str
    candidate: FixCandidate | None
    validation: Validation | None
    error: str = ""


@dataclass
class RepairResult:
    diagnostic: Diagnostic
    status: RepairStatus
    applied: FixCandidate | None = None
    attempts: int = 0
    log: list[AttemptRecord] = field(default_factory=list)
    before: SourceDocument | None = None
    after: SourceDocument | None = None

    @property
    def fixed(self) -> bool:
        return self.status is RepairStatus.FIXED

    def diff(self) -> str:
        if self.before is None or self.after is None:
            return ""
        name = self.before.path
        return "".join(
            difflib.unified_diff(
                self.before.text.splitlines(keepends=True),
                self.after.text.splitlines(keepends=True),
                f"a/{name}",
                f"b/{name}",
            )
        )


# the repair loop re-parses and re-checks the same text several times; both results are immutable
_CACHE_SIZE = 8
_cache: OrderedDict[tuple, tuple[PackageDb, Ast, tuple[Diagnostic, ...]]] = OrderedDict()


def _checked(doc: SourceDocument | Ast, db: PackageDb) -> tuple[Ast, tuple[Diagnostic, ...]]:
    source = doc.source if isinstance(doc, Ast) else doc
    key = (id(db), source.path, source.text)
    hit = _cache.get(key)
    if hit is not None and hit[0] is db:
        _cache.move_to_end(key)
        return hit[1], hit[2]
    ast = doc if isinstance(doc, Ast) else parse(doc)
    diags = tuple(diagnose(ast.source, static_report(ast, db), db, ast=ast))
    _cache[key] = (db, ast, diags)
    if len(_cache) > _CACHE_SIZE:
        _cache.popitem(last=False)
    return ast, diags


def static_diagnostics(doc: SourceDocument | Ast, db: PackageDb) -> list[Diagnostic]:
    return list(_checked(doc, db)[1])


def _signature(diags: Sequence[Diagnostic]) -> Counter:
    return Counter((d.category, d.pattern, d.token) for d in diags)


def _paragraph_lines(doc: SourceDocument, first: int, last: int) -> tuple[int, int]:
    while first > 1 and doc.line_text(first - 1).strip():
        first -= 1
    while last < doc.line_count and doc.line_text(last + 1).strip():
        last += 1
    return max(1, first - 1), min(doc.line_count, last + 1)


def allowed_regions(diag: Diagnostic, ast: Ast, rule_id: str | None = None) -> list[tuple[int, int]]:
    """Offset ranges (inclusive at both ends) a fix for ``diag`` may edit."""
    doc = ast.source
    span = diag.span
    first = doc.line_of(span.start)
    last = doc.line_of(max(span.end - 1, span.start))
    lo, hi = _paragraph_lines(doc, first, last)
    regions = [(doc.line_bounds(lo)[0], doc.line_bounds(hi)[1])]
    path = ast.path_to(span.start)
    for node in reversed(path):
        if node.begin is not None and node.name != "document" and node.span.start <= span.start:
            regions.append((node.span.start, node.span.end))
            break
    if rule_id in PREAMBLE_RULES:
        regions.append((0, ast.preamble_end))
    return regions


def validate(
    candidate: FixCandidate,
    doc: SourceDocument,
    diag: Diagnostic,
    db: PackageDb,
    *,
    ast: Ast | None = None,
    baseline: list[Diagnostic] | None = None,
) -> Validation:
    """Accept a candidate only if it parses no worse, clears the diagnostic,
    stays local and introduces no new diagnostic."""
    ast = ast if ast is not None else parse(doc)
    patch = candidate.patch
    try:
        patched = apply_patch(doc, patch)
    except PatchError as exc:
        return Validation(False, Reason.BAD_PATCH, str(exc))
    new_ast = parse(patched)
    if new_ast.recovery_count > ast.recovery_count:
        return Validation(
            False, Reason.PARSE_REGRESSION, f"recovery nodes {ast.recovery_count} -> {new_ast.recovery_count}"
        )
    after = _checked(new_ast, db)[1]
    start, end = patch.map_offset(diag.span.start), patch.map_offset(diag.span.end)
    for d in after:
        if d.category == diag.category and d.pattern == diag.pattern and d.span.start <= end and start <= d.span.end:
            return Validation(False, Reason.DIAGNOSTIC_PERSISTS, d.message)
    regions = allowed_regions(diag, ast, candidate.rule_id)
    for e in patch.edits:
        if not any(lo <= e.span.start and e.span.end <= hi for lo, hi in regions):
            return Validation(False, Reason.OUT_OF_SCOPE, f"edit at {e.span.start}..{e.span.end} (line {e.span.line})")
    before = baseline if baseline is not None else static_diagnostics(ast, db)
    added = _signature(after) - _signature(before)
    if added:
        cat, pattern, token = next(iter(added))
        return Validation(False, Reason.NEW_DIAGNOSTIC, f"{pattern} ({token})")
    return Validation(True, Reason.OK)


def default_providers() -> list[SuggestionProvider]:
    return [RuleProvider()]


def repair(
    diag: Diagnostic,
    doc: SourceDocument,
    ast: Ast | None = None,
    db: PackageDb | None = None,
    providers: Sequence[SuggestionProvider] | None = None,
    max_attempts: int = MAX_ATTEMPTS,
) -> RepairResult:
    """Try up to ``max_attempts`` rounds of suggestions; apply the first valid one."""
    db = db or default_db()
    if ast is None or ast.source is not doc:
        ast = _checked(doc, db)[0]
    providers = list(providers) if providers is not None else default_providers()
    baseline = static_diagnostics(ast, db)
    result = RepairResult(diag, RepairStatus.NO_CANDIDATES, before=doc)
    seen: set = set()
    for attempt in range(1, max_attempts + 1):
        result.attempts = attempt
        for provider in providers:
            try:
                candidates = list(provider.suggest(diag, ast, db, attempt))
            except Exception as exc:  # a misbehaving provider counts as having no suggestion
                result.log.append(AttemptRecord(attempt, getattr(provider, "id", "?"), None, None, repr(exc)))
                continue
            for cand in candidates:
                key = cand.patch.edits
                if key in seen:
                    continue
                seen.add(key)
                result.status = RepairStatus.UNFIXABLE
                v = validate(cand, doc, diag, db, ast=ast, baseline=baseline)
                result.log.append(AttemptRecord(attempt, cand.provider_id, cand, v))
                if v.valid:
                    result.status = RepairStatus.FIXED
                    result.applied = cand
                    result.after = apply_patch(doc, cand.patch)
                    return result
    return result


@dataclass
class DocumentFix:
    original: SourceDocument
    fixed: SourceDocument
    results: list[RepairResult]

    @property
    def changed(self) -> bool:
        return self.fixed.text != self.original.text

    def diff(self) -> str:
        name = self.original.path
        return "".join(
            difflib.unified_diff(
                self.original.text.splitlines(keepends=True),
                self.fixed.text.splitlines(keepends=True),
                f"a/{name}",
                f"b/{name}",
            )
        )


def _shift(diag: Diagnostic, doc: SourceDocument, patch) -> Diagnostic | None:
    start, end = patch.map_offset(diag.span.start), patch.map_offset(diag.span.end)
    if not 0 <= start <= end <= len(doc.text):
        return None
    return replace(diag, span=doc.span(start, end))


def _seen(diag: Diagnostic, diags: Sequence[Diagnostic]) -> bool:
    return any(
        d.category == diag.category and d.span.start <= diag.span.end and diag.span.start <= d.span.end
        for d in diags
    )


def _skip_key(diag: Diagnostic, doc: SourceDocument) -> tuple:
    return (diag.category, diag.pattern, diag.token, doc.line_text(diag.line).strip())


def fix_document(
    doc: SourceDocument,
    db: PackageDb | None = None,
    diagnostics: Sequence[Diagnostic] | None = None,
    providers: Sequence[SuggestionProvider] | None = None,
) -> DocumentFix:
    """Repair diagnostics one at a time in document order.

    Given diagnostics (e.g. from a compiler log) are repaired in order, their
    spans carried through each applied patch. Without them the document is
    re-checked statically after every fix until nothing fixable remains.
    """
    db = db or default_db()
    current = doc
    results: list[RepairResult] = []
    if diagnostics is not None:
        pending = list(diagnostics)
        while pending:
            result = repair(pending.pop(0), current, None, db, providers)
            results.append(result)
            if result.fixed:
                before = static_diagnostics(current, db)
                current = result.after
                after = static_diagnostics(current, db)
                patch = result.applied.patch
                shifted = []
                for d in pending:
                    moved = _shift(d, current, patch)
                    # drop diagnostics the static check saw before this fix but no longer sees
                    if moved is None or (_seen(d, before) and not _seen(moved, after)):
                        continue
                    shifted.append(moved)
                pending = shifted
        return DocumentFix(doc, current, results)
    skipped: set[tuple] = set()
    budget = 3 * len(static_diagnostics(doc, db)) + 10
    while budget > 0:
        budget -= 1
        ast = parse(current)
        todo = [d for d in static_diagnostics(ast, db) if _skip_key(d, current) not in skipped]
        if not todo:
            break
        result = repair(todo[0], current, ast, db, providers)
        results.append(result)
        if result.fixed:
            current = result.after
        else:
            skipped.add(_skip_key(todo[0], current))
    return DocumentFix(doc, current, results)
