"""Per-case evaluation: detection, localization and fix scoring."""

from __future__ import annotations

import difflib
import enum
import os
import re
import shutil
import subprocess
import tempfile
import time
from collections import Counter
from dataclasses import asdict, dataclass

from ..checks import static_report
from ..fix.engine import fix_document
from ..latex import SourceDocument, parse
from ..localize import Diagnostic, diagnose
from ..log import LogReport, parse_log
from ..packagedb import PackageDb, default_db
from .inject import BenchCase

COMPILE_TIMEOUT = 60.0
# how far (in lines) the patched document may differ from the seed around a repair
NEIGHBORHOOD = 2


class CompileMode(str, enum.Enum):
    ENGINE = "engine"
    PROXY = "proxy"


class CompileTimeout(RuntimeError):
    pass


class EngineUnavailable(RuntimeError):
    pass


@dataclass(frozen=True)
class CaseResult:
    case_id: str
    category: str
    detected: bool
    type_match: bool
    loc_match: bool
    fix_attempted: bool
    fix_valid: bool
    fix_compiles: bool | None = None
    runtime_ms: int = 0
    timed_out: bool = False

    def __post_init__(self) -> None:
        if (self.type_match or self.loc_match) and not self.detected:
            raise ValueError("a match requires a detection")

    @property
    def detection_hit(self) -> bool:
        return self.type_match and self.loc_match

    @property
    def fix_success(self) -> bool:
        return self.fix_compiles if self.fix_compiles is not None else self.fix_valid

    def to_dict(self, with_runtime: bool = False) -> dict:
        d = asdict(self)
        if not with_runtime:
            d.pop("runtime_ms")
        return d


def find_engine(engine: str | None = None) -> str | None:
    """Path of a usable TeX engine: the given one, $TEXDOCTOR_ENGINE, or pdflatex on PATH."""
    for cand in (engine, os.environ.get("TEXDOCTOR_ENGINE"), "pdflatex"):
        if cand:
            found = shutil.which(cand)
            if found:
                return found
    return None


def compile_document(doc: SourceDocument, engine: str, timeout: float = COMPILE_TIMEOUT, runs: int = 2) -> LogReport:
    """Compile in a private temp dir in nonstop mode and parse the final log.

    Two runs are made so cross references resolve the way they do for users.
    """
    deadline = time.monotonic() + timeout
    with tempfile.TemporaryDirectory(prefix="texdoctor-") as tmp:
        src = os.path.join(tmp, "main.tex")
        with open(src, "wb") as fh:
            fh.write(doc.to_bytes())
        for _ in range(runs):
            left = deadline - time.monotonic()
            if left <= 0:
                raise CompileTimeout(doc.path)
            try:
                subprocess.run(
                    [engine, "-interaction=nonstopmode", "main.tex"],
                    cwd=tmp,
                    stdin=subprocess.DEVNULL,
                    stdout=subprocess.DEVNULL,
                    stderr=subprocess.DEVNULL,
                    timeout=left,
                    check=False,
                )
            except subprocess.TimeoutExpired as exc:
                raise CompileTimeout(doc.path) from exc
        try:
            with open(os.path.join(tmp, "main.log"), "rb") as fh:
                text = fh.read().decode("utf-8", "replace")
        except FileNotFoundError:
            return LogReport((), engine=os.path.basename(engine))
    return parse_log(text)


def _lines(diag: Diagnostic, doc: SourceDocument) -> range:
    first = doc.line_of(diag.span.start)
    last = doc.line_of(max(diag.span.end - 1, diag.span.start))
    return range(first, last + 1)


_PACKAGE_LINE = re.compile(r"\\usepackage\s*(\[[^\]]*\])?\s*\{[^}]*\}")


def _normalized_lines(doc: SourceDocument) -> list[tuple[int, str]]:
    # package lines are compared as a multiset elsewhere, so neither their order nor position counts here
    return [
        (i, " ".join(line.split()))
        for i, line in enumerate(doc.text.split("\n"), 1)
        if not _PACKAGE_LINE.fullmatch(line.strip())
    ]


def _package_lines(doc: SourceDocument) -> Counter:
    return Counter(line.strip() for line in doc.text.split("\n") if _PACKAGE_LINE.fullmatch(line.strip()))


def _changed_lines(a: SourceDocument, b: SourceDocument) -> list[int]:
    """Lines of ``b`` (1-based) that differ structurally from ``a``; deletions mark the next line."""
    norm_a = _normalized_lines(a)
    norm_b = _normalized_lines(b)
    numbers = [n for n, _ in norm_b] + [b.line_count + 1]
    out: list[int] = []
    matcher = difflib.SequenceMatcher(None, [t for _, t in norm_a], [t for _, t in norm_b], autojunk=False)
    for tag, _, _, j1, j2 in matcher.get_opcodes():
        if tag == "equal":
            continue
        out.extend(numbers[j] for j in (range(j1, j2) if j2 > j1 else [j1]))
    return out


def confined_to_repairs(seed: SourceDocument, broken: SourceDocument, fixed: SourceDocument) -> bool:
    """The fixed document loads the seed's packages and differs from the seed
    only within a few lines of the repair edits."""
    if _package_lines(seed) != _package_lines(fixed):
        return False
    seed_diff = _changed_lines(seed, fixed)
    if not seed_diff:
        return True
    repairs = _changed_lines(broken, fixed)
    if not repairs:
        return False
    return all(any(abs(line - r) <= NEIGHBORHOOD for r in repairs) for line in seed_diff)


def log_clean(report: LogReport) -> bool:
    """No errors and no unresolved citations or references."""
    return report.clean and not any(
        r.pattern in ("citation-undefined", "reference-undefined") for r in report.records
    )


def _proxy_clean(doc: SourceDocument, db: PackageDb) -> bool:
    ast = parse(doc)
    return ast.recovery_count == 0 and log_clean(static_report(ast, db))


def evaluate_case(
    case: BenchCase,
    mode: CompileMode | str = CompileMode.PROXY,
    *,
    db: PackageDb | None = None,
    engine: str | None = None,
    timeout: float = COMPILE_TIMEOUT,
) -> CaseResult:
    mode = CompileMode(mode)
    db = db or default_db()
    start = time.perf_counter()
    doc = case.broken_doc
    ast = parse(doc)

    def result(**kw) -> CaseResult:
        ms = int((time.perf_counter() - start) * 1000)
        return CaseResult(case.id, case.category.value, runtime_ms=ms, **kw)

    if mode is CompileMode.ENGINE:
        exe = find_engine(engine)
        if exe is None:
            raise EngineUnavailable("no TeX engine found")
        try:
            log = compile_document(doc, exe, timeout)
        except CompileTimeout:
            return result(detected=False, type_match=False, loc_match=False, fix_attempted=False, fix_valid=False, timed_out=True)
    else:
        log = static_report(ast, db)
    diags = diagnose(doc, log, db, ast=ast)
    typed = [d for d in diags if d.category == case.category]
    pool = typed or diags
    loc_match = any(case.truth_line in _lines(d, doc) for d in pool)
    if not diags:
        return result(detected=False, type_match=False, loc_match=False, fix_attempted=False, fix_valid=False)
    outcome = fix_document(doc, db, diagnostics=diags)
    fix_valid = all(r.fixed for r in outcome.results)
    if mode is CompileMode.ENGINE:
        try:
            clean = log_clean(compile_document(outcome.fixed, exe, timeout))
        except CompileTimeout:
            clean = False
    else:
        clean = _proxy_clean(outcome.fixed, db)
    compiles = clean and confined_to_repairs(case.seed_doc, doc, outcome.fixed)
    return result(
        detected=True,
        type_match=bool(typed),
        loc_match=loc_match,
        fix_attempted=True,
        fix_valid=fix_valid,
        fix_compiles=compiles,
    )
