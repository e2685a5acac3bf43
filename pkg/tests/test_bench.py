from __future__ import annotations

import csv
import io
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from texdoctor.bench import (
    BaselineRow,
    BenchConfig,
    CaseResult,
    NotInjectable,
    build_suite,
    build_unclosed_suite,
    default_distribution,
    emit_report,
    evaluate_case,
    inject,
    inject_unclosed_environment,
    load_report,
    percent,
    run_bench,
    score,
)
from texdoctor.bench.evaluate import confined_to_repairs
from texdoctor.bench.report import COLUMN_LABELS
from texdoctor.bench.suite import InsufficientCorpus, REFERENCE_COUNTS, uniform_distribution
from texdoctor.latex import SourceDocument, parse
from texdoctor.localize import CATEGORY_ORDER, ErrorCategory

from .conftest import doc, wrap

UND, MATH, PKG, TAB, REF, ENC = CATEGORY_ORDER


def result(case_id, category, hit=True, fixed=True, compiles=None, detected=True):
    return CaseResult(
        case_id, category.value, detected=detected, type_match=hit, loc_match=hit,
        fix_attempted=detected, fix_valid=fixed, fix_compiles=compiles,
    )


class TestDistribution:
    """Largest-remainder scaling of the reference category counts."""

    def test_reference_suite(self):
        assert list(default_distribution(500).values()) == [112, 98, 74, 86, 79, 51]
        assert sum(REFERENCE_COUNTS.values()) == 500

    def test_fifty(self):
        # quotas 11.2 9.8 7.4 8.6 7.9 5.1: floors sum to 47, the three largest remainders get one more
        assert list(default_distribution(50).values()) == [11, 10, 7, 9, 8, 5]

    def test_zero_total(self):
        assert set(default_distribution(0).values()) == {0}
        assert build_suite(None, default_distribution(0)) == []

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            default_distribution(-1)

    @given(st.integers(min_value=0, max_value=5000))
    def test_sums_to_total_and_stays_within_one(self, total):
        counts = default_distribution(total)
        assert sum(counts.values()) == total
        for cat, n in counts.items():
            assert abs(n - total * REFERENCE_COUNTS[cat] / 500) < 1


class TestInject:
    """Error injection into clean seeds."""

    @pytest.mark.parametrize("category", CATEGORY_ORDER)
    def test_deterministic_and_local(self, category, seeds, db):
        made = 0
        for seed in seeds[:15]:
            try:
                a = inject(seed, category, 7, db)
            except NotInjectable:
                continue
            b = inject(seed, category, 7, db)
            assert a == b and a.broken_doc.text != seed.text
            span = a.injection_span
            tail = len(a.broken_doc.text) - span.end
            assert a.broken_doc.text[: span.start] == seed.text[: span.start]
            assert a.broken_doc.text[span.end :] == seed.text[len(seed.text) - tail :]
            assert 1 <= a.truth_line <= a.broken_doc.line_count
            made += 1
        assert made >= 5

    def test_rng_seed_changes_choice(self, seeds, db):
        picks = {inject(seeds[0], UND, r, db).broken_doc.text for r in range(10)}
        assert len(picks) > 1

    def test_seed_with_parse_error(self, db):
        with pytest.raises(NotInjectable):
            inject(doc(wrap("\\begin{itemize}")), UND, 0, db)

    def test_no_material(self, db):
        with pytest.raises(NotInjectable):
            inject(doc(wrap("Plain words.")), REF, 0, db)

    def test_unclosed_truth_is_begin_line(self, seeds):
        case = inject_unclosed_environment(seeds[0], 3)
        line = case.broken_doc.line_text(case.truth_line)
        assert line.lstrip().startswith("\\begin{")
        assert parse(case.broken_doc).recovery_count > parse(seeds[0]).recovery_count

    def test_case_to_dict(self, seeds, db):
        d = inject(seeds[0], UND, 1, db, "UND-000").to_dict()
        assert d["id"] == "UND-000" and d["category"] == "UndefinedControl"
        assert set(d) == {"id", "seed", "category", "injection_span", "injection_rule", "rng_seed", "truth_line"}


class TestSuite:
    """Suite construction."""

    def test_counts_and_ids(self, db):
        cases = build_suite(None, uniform_distribution(3), 5, db=db)
        assert [c.id for c in cases[:3]] == ["UND-000", "UND-001", "UND-002"]
        assert [c.category for c in cases] == [c for c in CATEGORY_ORDER for _ in range(3)]

    def test_deterministic(self, db):
        a = build_suite(None, uniform_distribution(2), 11, db=db)
        b = build_suite(None, uniform_distribution(2), 11, db=db)
        assert [c.to_dict() for c in a] == [c.to_dict() for c in b]

    def test_missing_corpus(self, tmp_path):
        with pytest.raises(InsufficientCorpus):
            build_suite(tmp_path / "nope", uniform_distribution(1))
        with pytest.raises(InsufficientCorpus):
            build_suite(tmp_path, uniform_distribution(1))

    def test_unclosed_suite_lines_differ(self, db):
        from texdoctor.checks import static_report

        cases = build_unclosed_suite(None, 5, 0, db=db)
        assert len(cases) == 5
        for case in cases:
            reported = [r.reported_line for r in static_report(parse(case.broken_doc), db).errors]
            assert case.truth_line not in reported


class TestConfinement:
    """Fixed documents must stay close to the seed."""

    SEED = wrap("First line.\nSecond line.\nThird line.\n\n" + "\n".join(f"Filler {i}." for i in range(20)), "\\usepackage{amsmath}\n")

    def test_identical_to_seed(self):
        s = doc(self.SEED)
        broken = doc(self.SEED.replace("Second", "Sec$ond"))
        assert confined_to_repairs(s, broken, s)

    def test_extra_package(self):
        s = doc(self.SEED)
        broken = doc(self.SEED.replace("Second", "\\foo"))
        fixed = doc(self.SEED.replace("\\usepackage{amsmath}", "\\usepackage{amsmath}\n\\usepackage{foo}"))
        assert not confined_to_repairs(s, broken, fixed)

    def test_package_order_ignored(self):
        seed_text = self.SEED.replace("\\usepackage{amsmath}", "\\usepackage{amsmath}\n\\usepackage{xcolor}")
        swapped = seed_text.replace("\\usepackage{amsmath}\n\\usepackage{xcolor}", "\\usepackage{xcolor}\n\\usepackage{amsmath}")
        broken = doc(swapped.replace("Second", "\\foo"))
        assert confined_to_repairs(doc(seed_text), broken, doc(swapped))

    def test_far_change(self):
        s = doc(self.SEED)
        broken = doc(self.SEED.replace("Second", "\\foo"))
        fixed = doc(broken.text.replace("Filler 18.", "Filler eighteen."))
        assert not confined_to_repairs(s, broken, fixed)

    def test_near_change(self):
        s = doc(self.SEED)
        broken = doc(self.SEED.replace("Second line.", "Second line.\n\\begin{itemize}"))
        fixed = doc(broken.text.replace("Third line.", "Third line.\n\\end{itemize}"))
        assert confined_to_repairs(s, broken, fixed)

    def test_moved_package_line(self):
        s = doc(self.SEED.replace("\\begin{document}", "\n\\usepackage{xcolor}\n\\begin{document}"))
        broken = doc(s.text.replace("\\usepackage{xcolor}\n", ""))
        fixed = doc(broken.text.replace("\\usepackage{amsmath}", "\\usepackage{amsmath}\n\\usepackage{xcolor}"))
        assert confined_to_repairs(s, broken, fixed)


class TestScore:
    """DA and FA arithmetic, checked against hand-computed values."""

    def test_percent_rounding(self):
        assert percent(2, 3) == 66.7
        assert percent(1, 8) == 12.5
        assert percent(1, 400) == 0.3  # half-up, not half-even
        assert percent(0, 5) == 0.0 and percent(5, 5) == 100.0
        assert percent(0, 0) is None

    def test_per_category_and_overall(self):
        rs = [
            result("UND-000", UND, hit=True, fixed=True),
            result("UND-001", UND, hit=False, fixed=True),
            result("UND-002", UND, hit=True, fixed=False),
            result("MATH-000", MATH, hit=True, fixed=True, compiles=False),
            result("MATH-001", MATH, detected=False, hit=False, fixed=False),
        ]
        report = score(rs)
        assert report.per_category["UndefinedControl"].da == 66.7
        assert report.per_category["UndefinedControl"].fa == 66.7
        # fix_compiles overrides fix_valid when present
        assert (report.per_category["MathMode"].da, report.per_category["MathMode"].fa) == (50.0, 0.0)
        assert (report.overall.n, report.overall.da, report.overall.fa) == (5, 60.0, 40.0)

    def test_hit_needs_type_and_location(self):
        r = CaseResult("UND-000", "UndefinedControl", True, True, False, True, True)
        assert not r.detection_hit
        with pytest.raises(ValueError):
            CaseResult("UND-000", "UndefinedControl", False, True, True, False, False)

    def test_order_independent(self):
        rs = [result(f"UND-{i:03d}", UND, hit=i % 2 == 0) for i in range(6)]
        assert score(rs).to_dict() == score(list(reversed(rs))).to_dict()

    def test_empty_category_is_missing(self):
        report = score([result("UND-000", UND)])
        text = emit_report(report, "text").decode()
        assert text.splitlines()[3].count("---") == 10
        rows = list(csv.reader(io.StringIO(emit_report(report, "csv").decode())))
        assert rows[0] == ["category", "n", "da", "fa"]
        assert rows[1] == ["Overall", "1", "100.0", "100.0"]

    def test_empty_suite(self):
        report = score([])
        assert (report.overall.n, report.overall.da, report.overall.fa) == (0, None, None)
        assert "---" in emit_report(report).decode()


class TestReportFormats:
    """Text, CSV and JSON output."""

    def make(self):
        rs = [result(f"{c.name[:3]}-000", c, hit=i % 2 == 0) for i, c in enumerate(CATEGORY_ORDER)]
        base = BaselineRow.from_dict({"system": "baseline", "values": {"Overall": [50.0, None]}})
        return score(rs, {"mode": "proxy"}, [base])

    def test_text_columns(self):
        lines = emit_report(self.make(), "text").decode().splitlines()
        header = lines[0]
        positions = [header.index(label) for label in COLUMN_LABELS.values()]
        assert positions == sorted(positions) and len(positions) == 7
        assert lines[1].split() == ["DA", "FA"] * 7
        assert lines[3].startswith("baseline") and "50.0   ---" in lines[3]
        assert lines[-1] == "mode = proxy"

    def test_json_round_trip(self):
        report = self.make()
        data = emit_report(report, "json")
        again = load_report(data)
        assert again.to_dict() == report.to_dict()
        assert emit_report(again, "json") == data
        assert json.loads(data)["version"] == 1

    def test_bad_baseline_column(self):
        with pytest.raises(ValueError):
            BaselineRow.from_dict({"system": "x", "values": {"Nope": [1, 2]}})

    def test_csv_rows(self):
        rows = list(csv.reader(io.StringIO(emit_report(self.make(), "csv").decode())))
        assert [r[0] for r in rows[1:]] == ["Overall"] + [c.value for c in CATEGORY_ORDER]


class TestRun:
    """Configured end-to-end runs."""

    def test_config_rejects_unknown_keys(self):
        with pytest.raises(ValueError):
            BenchConfig.from_dict({"totl": 5})

    def test_snapshot_is_host_free(self, tmp_path):
        snap = BenchConfig(corpus_dir=str(tmp_path / "corpus"), total=50).snapshot()
        assert snap["corpus"] == "corpus" and str(tmp_path) not in json.dumps(snap)
        assert list(snap["distribution"].values()) == [11, 10, 7, 9, 8, 5]

    def test_small_run_deterministic(self, db):
        config = BenchConfig(per_category=1, rng_seed=3)
        a = emit_report(run_bench(config, db), "json")
        b = emit_report(run_bench(config, db), "json")
        assert a == b
        assert load_report(a).overall.n == 6

    def test_evaluate_figure_like_case(self, db, fig4_doc):
        seed = SourceDocument(fig4_doc.text.replace("\\begin{document}", "\\usepackage[ruled,vlined]{algorithm2e}\n\\begin{document}"), "fig.tex")
        case = inject(seed, PKG, 0, db)
        assert case.injection_rule == "delete-usepackage" and case.broken_doc.text.count("algorithm2e") == 0
        r = evaluate_case(case, db=db)
        assert r.detected and r.detection_hit and r.fix_success
