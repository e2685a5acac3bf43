"""Command-line entry point: check, fix, explain, bench and db subcommands."""

from __future__ import annotations

import argparse
import json
import os
import shutil
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from .bench import (
    BenchConfig,
    CompileMode,
    EngineUnavailable,
    InsufficientCorpus,
    ReportFormat,
    compile_document,
    emit_report,
    find_engine,
    run_bench,
)
from .bench.evaluate import CompileTimeout
from .explain import explain
from .fix import (
    RemoteConfig,
    RemoteProvider,
    RepairResult,
    RuleProvider,
    SuggestionProvider,
    fix_document,
    repair,
)
from .latex import SourceDocument, parse
from .localize import Diagnostic, diagnose
from .log import LogReport, parse_log
from .packagedb import PackageDb, SchemaError, default_db, load_db

EXIT_OK = 0
EXIT_FOUND = 1
EXIT_FAILURE = 2
SCHEMA_VERSION = 1


class ToolFailure(Exception):
    """Reported on stderr and turned into exit code 2."""


@dataclass
class RunConfig:
    engine: str | None = None
    mode: str | None = None
    db: str | None = None
    format: str = "human"
    fix: str = "suggest"
    remote: RemoteConfig = field(default_factory=RemoteConfig)
    bench: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> RunConfig:
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ToolFailure(f"unknown config keys: {', '.join(sorted(unknown))}")
        d = dict(d)
        remote = RemoteConfig.from_dict(d.pop("remote", None) or {})
        # an endpoint alone does not switch the provider on; a missing one always switches it off
        remote.enabled = bool(remote.enabled and remote.url)
        return cls(remote=remote, **d)

    @classmethod
    def load(cls, path: str | None) -> RunConfig:
        if not path:
            return cls()
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ToolFailure(f"cannot read config {path}: {exc}") from exc


# -- helpers -------------------------------------------------------------------


def _config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.load(args.config)
    for name in ("engine", "mode", "db", "format", "fix"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    return cfg


def _db(cfg: RunConfig) -> PackageDb:
    if not cfg.db:
        return default_db()
    try:
        return load_db(cfg.db)
    except (OSError, SchemaError) as exc:
        raise ToolFailure(f"cannot load package database {cfg.db}: {exc}") from exc


def _read_doc(path: str) -> SourceDocument:
    try:
        return SourceDocument.read(path)
    except OSError as exc:
        raise ToolFailure(f"cannot read {path}: {exc.strerror or exc}") from exc


def _read_log(path: str) -> LogReport:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ToolFailure(f"cannot read log {path}: {exc.strerror or exc}") from exc
    # TeX never writes NUL bytes to a log; their presence means the file is not one
    if b"\0" in data:
        raise ToolFailure(f"malformed log {path}: contains NUL bytes")
    return parse_log(data)


def _providers(cfg: RunConfig) -> list[SuggestionProvider]:
    providers: list[SuggestionProvider] = [RuleProvider()]
    if cfg.remote.enabled:
        providers.append(RemoteProvider(cfg.remote))
    return providers


def _diagnose(doc: SourceDocument, cfg: RunConfig, db: PackageDb, log_path: str | None) -> list[Diagnostic]:
    """Diagnose from a given log, an engine compile, or static checks, in that order of preference."""
    ast = parse(doc)
    if log_path:
        return diagnose(doc, _read_log(log_path), db, ast=ast)
    mode = cfg.mode or (CompileMode.ENGINE.value if cfg.engine else CompileMode.PROXY.value)
    if mode == CompileMode.ENGINE.value:
        exe = find_engine(cfg.engine)
        if exe is None:
            raise ToolFailure("engine mode requested but no TeX engine was found")
        try:
            log = compile_document(doc, exe)
        except CompileTimeout as exc:
            raise ToolFailure(f"compile of {doc.path} timed out") from exc
        return diagnose(doc, log, db, ast=ast)
    from .checks import static_report

    return diagnose(doc, static_report(ast, db), db, ast=ast)


def _fix_entry(result: RepairResult | None) -> dict:
    if result is None:
        # cleared as a side effect of repairing an earlier diagnostic
        return {"status": "Resolved", "diff": ""}
    return {"status": result.status.value, "diff": result.diff()}


def _diag_json(diag: Diagnostic, result: RepairResult | None) -> dict:
    return {
        "id": diag.id,
        "category": diag.category.value if diag.category else None,
        "line": diag.line,
        "span": {"start": diag.span.start, "end": diag.span.end},
        "message": explain(diag),
        "confidence": diag.confidence.value,
        "fix": _fix_entry(result),
    }


def _document_json(path: str, diags: list[Diagnostic], results: dict[str, RepairResult]) -> str:
    body = {
        "version": SCHEMA_VERSION,
        "file": path,
        "diagnostics": [_diag_json(d, results.get(d.id)) for d in diags],
    }
    return json.dumps(body, indent=2, ensure_ascii=False) + "\n"


def _human(path: str, diag: Diagnostic) -> str:
    category = diag.category.value if diag.category else "Unclassified"
    head = f"{path}:{diag.line}: Compilation error -- line {diag.line} [{category}, {diag.confidence.value} confidence]"
    return f"{head}\n  {explain(diag)}\n"


def _writable(path: str) -> bool:
    # write bits are checked too: os.access says yes to root for any file
    try:
        mode = os.stat(path).st_mode
    except OSError:
        return False
    return os.access(path, os.W_OK) and bool(mode & 0o222)


def _write_atomic(path: str, data: bytes) -> str:
    """Back up ``path`` to ``path.bak``, then replace it via a temp file and rename."""
    if not _writable(path):
        raise ToolFailure(f"{path} is not writable")
    backup = path + ".bak"
    try:
        shutil.copy2(path, backup)
        folder = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(prefix=".texdoctor-", dir=folder)
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
                fh.flush()
                os.fsync(fh.fileno())
            shutil.copymode(path, tmp)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise ToolFailure(f"cannot write {path}: {exc.strerror or exc}") from exc
    return backup


# -- subcommands -----------------------------------------------------------------


def cmd_check(args: argparse.Namespace) -> int:
    cfg = _config(args)
    db = _db(cfg)
    doc = _read_doc(args.file)
    diags = _diagnose(doc, cfg, db, args.log)
    if cfg.format == "json":
        providers = _providers(cfg)
        results = {d.id: repair(d, doc, None, db, providers) for d in diags}
        sys.stdout.write(_document_json(args.file, diags, results))
    else:
        for d in diags:
            sys.stdout.write(_human(args.file, d))
    return EXIT_FOUND if diags else EXIT_OK


def _interactive(doc: SourceDocument, diags: list[Diagnostic], db: PackageDb, providers) -> tuple[SourceDocument, list[RepairResult]]:
    current = doc
    results: list[RepairResult] = []
    for diag in diags:
        # re-diagnose so spans refer to the current text
        live = [d for d in _static(current, db) if d.category == diag.category and d.pattern == diag.pattern]
        target = min(live, key=lambda d: abs(d.line - diag.line), default=None)
        if target is None:
            continue
        result = repair(target, current, None, db, providers)
        results.append(result)
        sys.stdout.write(_human(doc.path, target))
        if not result.fixed:
            sys.stdout.write(f"  no valid fix ({result.status.value})\n")
            continue
        sys.stdout.write(result.diff())
        try:
            answer = input("Apply this fix? [y/N] ")
        except EOFError:
            answer = ""
        if answer.strip().lower() in ("y", "yes"):
            current = result.after
    return current, results


def _static(doc: SourceDocument, db: PackageDb) -> list[Diagnostic]:
    from .fix import static_diagnostics

    return static_diagnostics(doc, db)


def cmd_fix(args: argparse.Namespace) -> int:
    cfg = _config(args)
    db = _db(cfg)
    doc = _read_doc(args.file)
    if cfg.fix in ("apply", "interactive") and not _writable(args.file):
        raise ToolFailure(f"{args.file} is not writable")
    diags = _diagnose(doc, cfg, db, args.log)
    providers = _providers(cfg)
    if cfg.fix == "interactive":
        fixed, results = _interactive(doc, diags, db, providers)
        if fixed.text != doc.text:
            backup = _write_atomic(args.file, fixed.to_bytes())
            print(f"wrote {args.file} (backup in {backup})")
        return EXIT_OK if all(r.fixed for r in results) else EXIT_FOUND
    outcome = fix_document(doc, db, diagnostics=diags, providers=providers)
    by_id = {r.diagnostic.id: r for r in outcome.results}
    all_fixed = all(r.fixed for r in outcome.results)
    if cfg.format == "json":
        sys.stdout.write(_document_json(args.file, diags, by_id))
    else:
        for r in outcome.results:
            if not r.fixed:
                sys.stdout.write(_human(args.file, r.diagnostic))
                sys.stdout.write(f"  no valid fix ({r.status.value})\n")
    if cfg.fix == "apply":
        if outcome.changed:
            backup = _write_atomic(args.file, outcome.fixed.to_bytes())
            if cfg.format != "json":
                print(f"wrote {args.file} (backup in {backup})")
    elif cfg.format != "json":
        sys.stdout.write(outcome.diff())
    return EXIT_OK if all_fixed else EXIT_FOUND


def cmd_explain(args: argparse.Namespace) -> int:
    cfg = _config(args)
    db = _db(cfg)
    doc = _read_doc(args.file)
    diags = _diagnose(doc, cfg, db, args.log)
    if args.line is not None:
        diags = [d for d in diags if d.line == args.line]
    if cfg.format == "json":
        out = [{"id": d.id, "line": d.line, "explanation": explain(d)} for d in diags]
        sys.stdout.write(json.dumps(out, indent=2, ensure_ascii=False) + "\n")
    else:
        for d in diags:
            print(f"Line {d.line}: {explain(d)}")
    return EXIT_FOUND if diags else EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = _config(args)
    db = _db(cfg)
    try:
        bench = BenchConfig.from_dict(dict(cfg.bench))
    except (TypeError, ValueError) as exc:
        raise ToolFailure(f"bad bench config: {exc}") from exc
    if args.corpus is not None:
        bench.corpus_dir = args.corpus
    if args.total is not None:
        bench.total = args.total
    if args.per_category is not None:
        bench.per_category = args.per_category
    if args.seed is not None:
        bench.rng_seed = args.seed
    if args.workers is not None:
        bench.workers = args.workers
    bench.mode = cfg.mode or bench.mode
    bench.engine = cfg.engine or bench.engine
    fmt = {"human": "text"}.get(cfg.format, cfg.format)
    try:
        report = run_bench(bench, db)
    except (InsufficientCorpus, EngineUnavailable) as exc:
        raise ToolFailure(str(exc)) from exc
    data = emit_report(report, ReportFormat(fmt))
    if args.output:
        try:
            Path(args.output).write_bytes(data)
        except OSError as exc:
            raise ToolFailure(f"cannot write {args.output}: {exc.strerror or exc}") from exc
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return EXIT_OK


def cmd_db(args: argparse.Namespace) -> int:
    cfg = _config(args)
    path = args.path or cfg.db
    try:
        db = load_db(path) if path else default_db()
    except (OSError, SchemaError) as exc:
        print(f"invalid package database: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    if args.db_command == "validate":
        print(f"ok: {len(db.records)} packages, {len(db.conflicts)} conflict rules")
        return EXIT_OK
    if cfg.format == "json":
        print(json.dumps(db.to_dict(), indent=2, sort_keys=True))
        return EXIT_OK
    for rec in sorted(db.records.values(), key=lambda r: r.name):
        print(f"{rec.name:<16} {len(rec.provides_commands):>4} commands {len(rec.provides_environments):>3} environments")
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--db", help="package database JSON (default: the shipped one)")
    common.add_argument("--engine", help="TeX engine binary, e.g. pdflatex")
    common.add_argument("--mode", choices=["engine", "proxy"], help="compile with the engine or use static checks")
    common.add_argument("--format", choices=["human", "json", "text", "csv"], help="output format")

    doc_args = argparse.ArgumentParser(add_help=False)
    doc_args.add_argument("file", help="LaTeX source file")
    doc_args.add_argument("--log", help="existing engine log for the file")

    ap = argparse.ArgumentParser(prog="texdoctor", description="Diagnose and repair LaTeX compilation errors.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common, doc_args], help="list diagnostics")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("fix", parents=[common, doc_args], help="suggest or apply validated fixes")
    p.add_argument("--fix", choices=["suggest", "apply", "interactive"], help="what to do with fixes (default: suggest)")
    p.set_defaults(func=cmd_fix)

    p = sub.add_parser("explain", parents=[common, doc_args], help="plain-language explanations")
    p.add_argument("--line", type=int, help="only diagnostics on this line")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("bench", parents=[common], help="run the error-injection benchmark")
    p.add_argument("--corpus", help="directory of clean seed .tex files (default: shipped seeds)")
    p.add_argument("--total", type=int, help="number of cases, split like the reference suite")
    p.add_argument("--per-category", type=int, help="fixed number of cases per category instead of --total")
    p.add_argument("--seed", type=int, help="rng seed for case generation")
    p.add_argument("--workers", type=int, help="parallel engine compiles")
    p.add_argument("--output", "-o", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("db", help="inspect the package database")
    dsub = p.add_subparsers(dest="db_command", required=True)
    for name, text in (("validate", "check a database file against the schema"), ("list", "list packages")):
        q = dsub.add_parser(name, parents=[common], help=text)
        q.add_argument("path", nargs="?", help="database file (default: --db or the shipped one)")
        q.set_defaults(func=cmd_db)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt = getattr(args, "format", None)
    if args.command in ("check", "fix", "explain") and fmt in ("text", "csv"):
        parser.error(f"--format {fmt} is only valid for bench")
    try:
        return args.func(args)
    except ToolFailure as exc:
        print(f"texdoctor: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except KeyboardInterrupt:
        return EXIT_FAILURE


if __name__ == "__main__":
    raise SystemExit(main())
