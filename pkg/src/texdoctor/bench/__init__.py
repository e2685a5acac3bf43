"""Error-injection benchmark: suites, evaluation and DA/FA reports."""

from .evaluate import (
    CaseResult,
    CompileMode,
    CompileTimeout,
    EngineUnavailable,
    compile_document,
    confined_to_repairs,
    evaluate_case,
    find_engine,
    log_clean,
)
from .inject import BenchCase, Mutation, NotInjectable, inject, inject_unclosed_environment
from .report import BaselineRow, BenchReport, Metrics, ReportFormat, emit_report, load_report, percent, score
from .run import BenchConfig, evaluate_cases, run_bench
from .suite import (
    REFERENCE_COUNTS,
    InsufficientCorpus,
    build_suite,
    build_unclosed_suite,
    default_corpus_dir,
    default_distribution,
    load_corpus,
    uniform_distribution,
)

__all__ = [
    "REFERENCE_COUNTS",
    "BaselineRow",
    "BenchCase",
    "BenchConfig",
    "BenchReport",
    "CaseResult",
    "CompileMode",
    "CompileTimeout",
    "EngineUnavailable",
    "InsufficientCorpus",
    "Metrics",
    "Mutation",
    "NotInjectable",
    "ReportFormat",
    "build_suite",
    "build_unclosed_suite",
    "compile_document",
    "confined_to_repairs",
    "default_corpus_dir",
    "default_distribution",
    "emit_report",
    "evaluate_case",
    "evaluate_cases",
    "find_engine",
    "inject",
    "inject_unclosed_environment",
    "load_corpus",
    "load_report",
    "log_clean",
    "percent",
    "run_bench",
    "score",
    "uniform_distribution",
]
