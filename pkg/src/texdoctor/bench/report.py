"""Aggregate case results into DA/FA tables and serialize them."""

from __future__ import annotations

import csv
import enum
import io
import json
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

from ..localize import CATEGORY_ORDER
from .evaluate import CaseResult

MISSING = "---"
REPORT_VERSION = 1

# column headings of the text table, Overall first then the six categories
COLUMN_LABELS = {
    "Overall": "Overall",
    "UndefinedControl": "Undef. ctrl.",
    "MathMode": "Math mode",
    "PackageConflict": "Pkg.",
    "TableFigure": "Table/fig.",
    "ReferenceError": "Refs.",
    "EncodingFont": "Enc./font",
}
CATEGORY_KEYS = tuple(c.value for c in CATEGORY_ORDER)


class ReportFormat(str, enum.Enum):
    TEXT = "text"
    JSON = "json"
    CSV = "csv"


def percent(hits: int, n: int) -> float | None:
    """``100 * hits / n`` rounded half-up to one decimal; None when n is 0."""
    if n == 0:
        return None
    value = (Decimal(100) * hits / n).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)
    return float(value)


def fmt_percent(value: float | None) -> str:
    return MISSING if value is None else f"{value:.1f}"


@dataclass(frozen=True)
class Metrics:
    n: int
    da: float | None
    fa: float | None

    @classmethod
    def of(cls, results: list[CaseResult]) -> Metrics:
        n = len(results)
        return cls(n, percent(sum(r.detection_hit for r in results), n), percent(sum(r.fix_success for r in results), n))

    def to_dict(self) -> dict:
        return {"n": self.n, "da": self.da, "fa": self.fa}

    @classmethod
    def from_dict(cls, d: Mapping) -> Metrics:
        return cls(int(d["n"]), d.get("da"), d.get("fa"))


@dataclass(frozen=True)
class BaselineRow:
    """Externally supplied numbers shown next to ours; never computed here."""

    system: str
    values: dict[str, tuple[float | None, float | None]]

    def to_dict(self) -> dict:
        return {"system": self.system, "values": {k: list(v) for k, v in self.values.items()}}

    @classmethod
    def from_dict(cls, d: Mapping) -> BaselineRow:
        values = {}
        for key, pair in d.get("values", {}).items():
            if key not in COLUMN_LABELS:
                raise ValueError(f"unknown baseline column {key!r}")
            da, fa = pair
            values[key] = (da, fa)
        return cls(str(d["system"]), values)


@dataclass
class BenchReport:
    per_category: dict[str, Metrics]
    overall: Metrics
    config: dict = field(default_factory=dict)
    cases: list[dict] = field(default_factory=list)
    system: str = "texdoctor"
    baselines: list[BaselineRow] = field(default_factory=list)

    def row(self) -> dict[str, tuple[float | None, float | None]]:
        out = {"Overall": (self.overall.da, self.overall.fa)}
        for key in CATEGORY_KEYS:
            m = self.per_category.get(key, Metrics(0, None, None))
            out[key] = (m.da, m.fa)
        return out

    def to_dict(self) -> dict:
        return {
            "version": REPORT_VERSION,
            "system": self.system,
            "config": self.config,
            "overall": self.overall.to_dict(),
            "per_category": {k: m.to_dict() for k, m in self.per_category.items()},
            "baselines": [b.to_dict() for b in self.baselines],
            "cases": self.cases,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> BenchReport:
        return cls(
            per_category={k: Metrics.from_dict(v) for k, v in d["per_category"].items()},
            overall=Metrics.from_dict(d["overall"]),
            config=dict(d.get("config", {})),
            cases=list(d.get("cases", [])),
            system=str(d.get("system", "texdoctor")),
            baselines=[BaselineRow.from_dict(b) for b in d.get("baselines", [])],
        )


def score(
    results: Iterable[CaseResult],
    config: Mapping | None = None,
    baselines: Iterable[BaselineRow] = (),
    system: str = "texdoctor",
) -> BenchReport:
    """Per-category and overall DA/FA; FA uses fix_compiles when present."""
    results = sorted(results, key=lambda r: r.case_id)
    by_cat: dict[str, list[CaseResult]] = {}
    for r in results:
        by_cat.setdefault(r.category, []).append(r)
    keys = [k for k in CATEGORY_KEYS if k in by_cat] + sorted(k for k in by_cat if k not in CATEGORY_KEYS)
    return BenchReport(
        per_category={k: Metrics.of(by_cat[k]) for k in keys},
        overall=Metrics.of(results),
        config=dict(config or {}),
        cases=[r.to_dict() for r in results],
        system=system,
        baselines=list(baselines),
    )


def _text_table(report: BenchReport) -> str:
    columns = list(COLUMN_LABELS)
    label_w = max(len("System"), len(report.system), *(len(b.system) for b in report.baselines))
    cell_w = max(11, *(len(v) for v in COLUMN_LABELS.values()))
    head1 = "System".ljust(label_w) + "".join("  " + COLUMN_LABELS[c].center(cell_w) for c in columns)
    head2 = " " * label_w + "".join("  " + f"{'DA':>5} {'FA':>5}".center(cell_w) for _ in columns)
    rule = "-" * len(head1)

    def line(name: str, values: Mapping[str, tuple]) -> str:
        cells = []
        for c in columns:
            da, fa = values.get(c, (None, None))
            cells.append("  " + f"{fmt_percent(da):>5} {fmt_percent(fa):>5}".center(cell_w))
        return (name.ljust(label_w) + "".join(cells)).rstrip()

    rows = [head1.rstrip(), head2.rstrip(), rule]
    rows += [line(b.system, b.values) for b in report.baselines]
    if report.baselines:
        rows.append(rule)
    rows.append(line(report.system, report.row()))
    counts = ", ".join(f"{COLUMN_LABELS.get(k, k)} {m.n}" for k, m in report.per_category.items())
    rows.append(rule)
    rows.append(f"n = {report.overall.n}" + (f" ({counts})" if counts else ""))
    if report.config.get("mode"):
        rows.append(f"mode = {report.config['mode']}")
    return "\n".join(rows) + "\n"


def _csv(report: BenchReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["category", "n", "da", "fa"])
    w.writerow(["Overall", report.overall.n, fmt_percent(report.overall.da), fmt_percent(report.overall.fa)])
    for key, m in report.per_category.items():
        w.writerow([key, m.n, fmt_percent(m.da), fmt_percent(m.fa)])
    return buf.getvalue()


def emit_report(report: BenchReport, fmt: ReportFormat | str = ReportFormat.TEXT) -> bytes:
    """Deterministic serialization of ``report``."""
    fmt = ReportFormat(fmt)
    if fmt is ReportFormat.JSON:
        text = json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"
    elif fmt is ReportFormat.CSV:
        text = _csv(report)
    else:
        text = _text_table(report)
    return text.encode("utf-8")


def load_report(data: bytes | str) -> BenchReport:
    return BenchReport.from_dict(json.loads(data))
