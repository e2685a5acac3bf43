"""End-to-end benchmark runs: build a suite, evaluate every case, score."""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..localize import ErrorCategory
from ..packagedb import PackageDb, default_db
from .evaluate import COMPILE_TIMEOUT, CaseResult, CompileMode, EngineUnavailable, evaluate_case, find_engine
from .inject import BenchCase
from .report import BaselineRow, BenchReport, score
from .suite import build_suite, default_distribution, uniform_distribution


@dataclass
class BenchConfig:
    corpus_dir: str | None = None
    total: int = 500
    per_category: int | None = None
    rng_seed: int = 0
    mode: str = CompileMode.PROXY.value
    engine: str | None = None
    timeout: float = COMPILE_TIMEOUT
    workers: int = 0
    baselines: list[dict] = field(default_factory=list)

    @classmethod
    def from_dict(cls, d: dict) -> BenchConfig:
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown bench config keys: {', '.join(sorted(unknown))}")
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path) -> BenchConfig:
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def distribution(self) -> dict[ErrorCategory, int]:
        if self.per_category is not None:
            return uniform_distribution(self.per_category)
        return default_distribution(self.total)

    def snapshot(self) -> dict:
        """What the report records: enough to rerun, nothing host-specific."""
        return {
            "corpus": Path(self.corpus_dir).name if self.corpus_dir else "builtin-seeds",
            "distribution": {c.value: n for c, n in self.distribution().items()},
            "rng_seed": self.rng_seed,
            "mode": CompileMode(self.mode).value,
            "provider": "rules",
            "timeout_s": self.timeout,
        }


def _evaluate(args: tuple) -> CaseResult:
    case, mode, engine, timeout = args
    return evaluate_case(case, mode, engine=engine, timeout=timeout)


def evaluate_cases(
    cases: list[BenchCase],
    mode: CompileMode | str = CompileMode.PROXY,
    *,
    db: PackageDb | None = None,
    engine: str | None = None,
    timeout: float = COMPILE_TIMEOUT,
    workers: int = 0,
) -> list[CaseResult]:
    """Evaluate ``cases``; engine compiles fan out to worker processes when workers > 1."""
    mode = CompileMode(mode)
    if mode is CompileMode.ENGINE:
        engine = find_engine(engine)
        if engine is None:
            raise EngineUnavailable("no TeX engine found; set --engine or TEXDOCTOR_ENGINE")
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                return list(pool.map(_evaluate, [(c, mode, engine, timeout) for c in cases]))
    db = db or default_db()
    return [evaluate_case(c, mode, db=db, engine=engine, timeout=timeout) for c in cases]


def run_bench(config: BenchConfig, db: PackageDb | None = None) -> BenchReport:
    db = db or default_db()
    cases = build_suite(config.corpus_dir, config.distribution(), config.rng_seed, db=db)
    results = evaluate_cases(
        cases, config.mode, db=db, engine=config.engine, timeout=config.timeout, workers=config.workers
    )
    baselines = [BaselineRow.from_dict(b) for b in config.baselines]
    return score(results, config.snapshot(), baselines)
