from __future__ import annotations

from pathlib import Path

import pytest

from texdoctor.checks import static_report
from texdoctor.latex import NodeKind, SourceDocument, parse
from texdoctor.localize import (
    CATEGORY_ORDER,
    Confidence,
    ErrorCategory,
    NoLocation,
    Unclassifiable,
    advisories,
    classify,
    diagnose,
    localize,
    localize_detail,
)
from texdoctor.log import LogReport, parse_log, read_log

from .conftest import doc, wrap

LOGS = Path(__file__).parent / "data" / "logs"


def record(log: str):
    (rec,) = parse_log(log).records
    return rec


def filler(n: int) -> str:
    return "\n".join(f"Sentence number {i} of the text." for i in range(n))


class TestCategories:
    """The six categories of the benchmark taxonomy."""

    def test_exactly_six(self):
        assert [c.value for c in CATEGORY_ORDER] == [
            "UndefinedControl", "MathMode", "PackageConflict", "TableFigure", "ReferenceError", "EncodingFont",
        ]


class TestClassify:
    """Record to category."""

    @pytest.mark.parametrize(
        "log, expected",
        [
            ("! LaTeX Error: Environment algorithm undefined.\n\nl.9 \\begin{algorithm}\n", ErrorCategory.PACKAGE_CONFLICT),
            ("! Missing $ inserted.\nl.3 a_\n", ErrorCategory.MATH_MODE),
            ("LaTeX Warning: Citation `smith99' on page 1 undefined on input line 3.\n", ErrorCategory.REFERENCE_ERROR),
            ("! Package inputenc Error: Unicode character α (U+03B1)\n(inputenc) not set up.\n\nl.5 α\n", ErrorCategory.ENCODING_FONT),
            ("! Undefined control sequence.\nl.2 \\fooo\n", ErrorCategory.UNDEFINED_CONTROL),
            ("! Extra alignment tab has been changed to \\cr.\nl.4 a&b&c\n", ErrorCategory.TABLE_FIGURE),
            ("! LaTeX Error: Not in outer par mode.\n\nl.4 \\begin{figure}\n", ErrorCategory.TABLE_FIGURE),
            ("! LaTeX Error: File `algorithm2f.sty' not found.\n\nl.3 \\usepackage\n", ErrorCategory.PACKAGE_CONFLICT),
            ("! Font \\T1/cmr/m/n/10=ecrm1000 at 10.0pt not loadable: Metric (TFM) file not found.\nl.1 x\n", ErrorCategory.ENCODING_FONT),
            ("LaTeX Warning: Reference `sec:x' on page 1 undefined on input line 3.\n", ErrorCategory.REFERENCE_ERROR),
        ],
    )
    def test_examples(self, log, expected, db):
        assert classify(record(log), parse(doc(wrap("x"))), db) is expected

    def test_missing_package_beats_undefined(self, db):
        """An unloaded package's command is a package problem first."""
        ast = parse(doc(wrap("\\toprule")))
        assert classify(record("! Undefined control sequence.\nl.4 \\toprule\n"), ast, db) is ErrorCategory.PACKAGE_CONFLICT

    def test_loaded_package_means_typo(self, db):
        ast = parse(doc(wrap("\\toprule", "\\usepackage{booktabs}\n")))
        rec = record("! Undefined control sequence.\nl.5 \\toprul\n")
        assert classify(rec, ast, db) is ErrorCategory.UNDEFINED_CONTROL

    def test_unknown_error_unclassifiable(self, db):
        with pytest.raises(Unclassifiable):
            classify(record("! Something odd.\nl.1 x\n"), parse(doc("x")), db)


class TestLocalize:
    """Record to source span."""

    def test_fig4_pattern_line_9(self, db):
        d = doc(filler(8) + "\n\\foo and more\n")
        ast = parse(d)
        rec = record("! Undefined control sequence.\nl.9 \\foo\n")
        loc = localize_detail(rec, ast, db)
        assert loc.confidence is Confidence.HIGH
        assert d.text[loc.span.start : loc.span.end] == "\\foo"
        assert loc.span.line == 9
        assert loc.path[-1].kind is NodeKind.COMMAND

    def test_misleading_end_of_document_line(self, db):
        """An unclosed environment is reported at \\end{document} but opened much earlier."""
        body = "\\begin{itemize}\n\\item one\n" + filler(33)
        d = doc("\\documentclass{article}\n\\begin{document}\nIntro.\n" + body + "\n\\end{document}\n")
        assert d.text.splitlines()[3] == "\\begin{itemize}"
        last = d.line_count - 1
        rec = record(
            f"! LaTeX Error: \\begin{{itemize}} on input line 4 ended by \\end{{document}}.\n\nl.{last} \\end{{document}}\n"
        )
        span = localize(rec, parse(d), db)
        assert span.line == 4
        assert d.text[span.start : span.end].startswith("\\begin{itemize}")

    def test_widened_window_is_medium(self, db):
        d = doc(filler(11) + "\n\\foo\n")
        loc = localize_detail(record("! Undefined control sequence.\nl.9 \\foo\n"), parse(d), db)
        assert loc.span.line == 12
        assert loc.confidence is Confidence.MEDIUM

    def test_no_line_no_token(self, db):
        rec = record("! Something odd.\n")
        ast = parse(doc("abc\ndef"))
        loc = localize_detail(rec, ast, db)
        assert loc.span.start == 0 and loc.confidence is Confidence.LOW and loc.no_location
        with pytest.raises(NoLocation):
            localize(rec, ast, db, strict=True)

    def test_span_within_document(self, db, seeds):
        for name in sorted(p.stem for p in LOGS.glob("*.log")):
            report = read_log(LOGS / f"{name}.log")
            d = seeds[0]
            for diag in diagnose(d, report, db):
                assert 0 <= diag.span.start <= diag.span.end <= len(d.text)


class TestDiagnose:
    """Fusion of log, tree and package database."""

    def test_fig4_one_diagnostic(self, fig4_doc, db):
        (diag,) = diagnose(fig4_doc, read_log(LOGS / "env_undefined.log"), db)
        assert diag.category is ErrorCategory.PACKAGE_CONFLICT
        assert diag.line == 9
        assert fig4_doc.text[diag.span.start : diag.span.end] == "\\begin{algorithm}"
        assert "algorithm2e" in diag.message and "not loaded" in diag.message
        # the \KwIn error and the \end mismatch are folded in as evidence
        assert len(diag.evidence.records) == 3

    def test_clean_log(self, fig4_doc, db):
        assert diagnose(fig4_doc, read_log(LOGS / "clean.log"), db) == []
        assert diagnose(fig4_doc, LogReport(()), db) == []

    def test_two_errors_in_span_order(self, db):
        d = doc(wrap("A \\foo here.\n\nThen $x and \\bar.", "\\usepackage{amsmath}\n"))
        diags = diagnose(d, static_report(parse(d), db), db)
        assert len(diags) >= 2
        assert [x.span.start for x in diags] == sorted(x.span.start for x in diags)

    def test_unclassified_is_kept(self, db):
        (diag,) = diagnose(doc("x\n"), parse_log("! Something odd.\nl.1 x\n"), db)
        assert diag.category is None and diag.pattern == "unclassified"
        assert diag.id.startswith("UNK-")

    def test_duplicates_collapse(self, db):
        log = "! Undefined control sequence.\nl.1 \\foo\n\n! Undefined control sequence.\nl.1 \\foo\n\n"
        (diag,) = diagnose(doc("\\foo\n"), parse_log(log), db)
        assert diag.evidence.records == (0, 1)

    def test_missing_package_symbols_collapse(self, db):
        d = doc(wrap("\\toprule\na\\\\\n\\midrule\nb\\\\\n\\bottomrule"))
        diags = diagnose(d, static_report(parse(d), db), db)
        assert [x.details["package"] for x in diags] == ["booktabs"]

    def test_badbox_is_advisory_only(self, db):
        report = read_log(LOGS / "overfull_hbox.log")
        assert diagnose(doc("x"), report, db) == []
        assert len(advisories(report)) == 1

    def test_deterministic(self, db, seeds):
        d = SourceDocument(seeds[3].text.replace("\\begin{document}", "\\begin{document}\n\\foo $x"), "s.tex")
        report = static_report(parse(d), db)
        first = [x.to_dict() for x in diagnose(d, report, db)]
        second = [x.to_dict() for x in diagnose(d, report, db)]
        assert first == second and first

    def test_evidence_and_message_non_empty(self, db):
        d = doc(wrap("\\foo $x"))
        for diag in diagnose(d, static_report(parse(d), db), db):
            assert diag.message and diag.evidence.records


class TestStaticChecks:
    """The engine-free pseudo log."""

    def test_seeds_are_clean(self, db, seeds):
        for s in seeds:
            assert static_report(parse(s), db).clean, s.path

    def test_reports_pdftex_format(self, db):
        report = static_report(parse(doc(wrap("\\foo"))), db)
        assert report.engine == "pdflatex"
        assert [(r.pattern, r.token, r.reported_line) for r in report.errors] == [("undefined-cs", "foo", 3)]

    def test_unknown_package_silences_symbol_checks(self, db):
        d = doc(wrap("\\mysterycommand", "\\usepackage{somethingexotic}\n"))
        assert static_report(parse(d), db).clean

    def test_undefined_key_warnings(self, db):
        d = doc(wrap("See \\cite{nokey} and \\ref{nolabel}."))
        patterns = [r.pattern for r in static_report(parse(d), db).records]
        assert patterns == ["citation-undefined", "reference-undefined"]
