"""Suite construction with the category distribution of the reference benchmark."""

from __future__ import annotations

import random
from collections.abc import Mapping
from fractions import Fraction
from importlib import resources
from pathlib import Path

from ..latex import SourceDocument
from ..localize import CATEGORY_ABBREV, CATEGORY_ORDER, ErrorCategory
from ..packagedb import PackageDb, default_db
from .inject import BenchCase, NotInjectable, inject, inject_unclosed_environment

# cases per category in the 500-case reference suite, in table order
REFERENCE_COUNTS: dict[ErrorCategory, int] = dict(zip(CATEGORY_ORDER, (112, 98, 74, 86, 79, 51)))


class InsufficientCorpus(ValueError):
    pass


def default_distribution(total: int, weights: Mapping[ErrorCategory, int] = REFERENCE_COUNTS) -> dict[ErrorCategory, int]:
    """Scale ``weights`` to ``total`` by largest-remainder apportionment."""
    if total < 0:
        raise ValueError("total must be non-negative")
    whole = sum(weights.values())
    quotas = {c: Fraction(total * w, whole) for c, w in weights.items()}
    counts = {c: int(q) for c, q in quotas.items()}
    left = total - sum(counts.values())
    order = list(weights)
    by_remainder = sorted(order, key=lambda c: (-(quotas[c] - counts[c]), order.index(c)))
    for c in by_remainder[:left]:
        counts[c] += 1
    return counts


def uniform_distribution(per_category: int) -> dict[ErrorCategory, int]:
    return {c: per_category for c in CATEGORY_ORDER}


def default_corpus_dir() -> Path:
    return Path(str(resources.files("texdoctor") / "data" / "seeds"))


def load_corpus(corpus_dir: str | Path) -> list[SourceDocument]:
    path = Path(corpus_dir)
    if not path.is_dir():
        raise InsufficientCorpus(f"corpus directory {path} not found")
    docs = [SourceDocument.read(p) for p in sorted(path.glob("*.tex"))]
    # store names relative to the corpus so reports do not depend on the checkout location
    return [SourceDocument(d.text, Path(d.path).name) for d in docs]


def _pick(seeds: list[SourceDocument], tag: str, rng_seed: int, index: int, make) -> BenchCase:
    rng = random.Random(f"{rng_seed}:{tag}:{index}")
    order = list(range(len(seeds)))
    rng.shuffle(order)
    case_seed = rng.randrange(2**31)
    for i in order:
        try:
            return make(seeds[i], case_seed)
        except NotInjectable:
            continue
    raise InsufficientCorpus(f"no seed accepts a {tag} injection")


def build_suite(
    corpus_dir: str | Path | None = None,
    distribution: Mapping[ErrorCategory, int] | None = None,
    rng_seed: int = 0,
    *,
    total: int | None = None,
    db: PackageDb | None = None,
) -> list[BenchCase]:
    """Exactly ``distribution[c]`` cases per category, deterministic in ``rng_seed``."""
    db = db or default_db()
    if distribution is None:
        distribution = default_distribution(500 if total is None else total)
    if sum(distribution.values()) == 0:
        return []
    seeds = load_corpus(corpus_dir or default_corpus_dir())
    if not seeds:
        raise InsufficientCorpus("corpus is empty")
    cases = []
    for cat in CATEGORY_ORDER:
        for i in range(distribution.get(cat, 0)):
            case_id = f"{CATEGORY_ABBREV[cat]}-{i:03d}"
            cases.append(
                _pick(seeds, cat.value, rng_seed, i, lambda s, r, cat=cat, cid=case_id: inject(s, cat, r, db, cid))
            )
    return cases


def build_unclosed_suite(
    corpus_dir: str | Path | None = None,
    count: int = 20,
    rng_seed: int = 0,
    *,
    db: PackageDb | None = None,
    max_tries: int = 1000,
) -> list[BenchCase]:
    """Unclosed-environment cases whose compiler-reported line differs from the ground truth."""
    from ..checks import static_report
    from ..latex import parse

    db = db or default_db()
    seeds = load_corpus(corpus_dir or default_corpus_dir())
    out: list[BenchCase] = []
    seen: set[tuple] = set()
    for i in range(max_tries):
        if len(out) >= count:
            break
        case = _pick(seeds, "unclosed", rng_seed, i, lambda s, r, i=i: inject_unclosed_environment(s, r, f"ENV-{i:03d}"))
        key = (case.seed_doc.path, case.injection_span.start)
        if key in seen:
            continue
        seen.add(key)
        report = static_report(parse(case.broken_doc), db)
        lines = {r.reported_line for r in report.errors}
        if lines and case.truth_line not in lines:
            out.append(case)
    if len(out) < count:
        raise InsufficientCorpus(f"only {len(out)} misleading-line cases found")
    return out
