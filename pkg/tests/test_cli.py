from __future__ import annotations

import json
import os
import stat
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from texdoctor.cli import EXIT_FAILURE, EXIT_FOUND, EXIT_OK, main

from .conftest import wrap

DATA = Path(__file__).parent / "data"
LOGS = DATA / "logs"
PACKAGE_LINE = "\\usepackage[ruled,vlined]{algorithm2e}"

DIAGNOSTICS_SCHEMA = {
    "type": "object",
    "required": ["version", "file", "diagnostics"],
    "additionalProperties": False,
    "properties": {
        "version": {"const": 1},
        "file": {"type": "string"},
        "diagnostics": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "category", "line", "span", "message", "confidence", "fix"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string"},
                    "category": {
                        "enum": ["UndefinedControl", "MathMode", "PackageConflict", "TableFigure",
                                 "ReferenceError", "EncodingFont", None]
                    },
                    "line": {"type": "integer", "minimum": 1},
                    "span": {
                        "type": "object",
                        "required": ["start", "end"],
                        "properties": {"start": {"type": "integer", "minimum": 0}, "end": {"type": "integer", "minimum": 0}},
                    },
                    "message": {"type": "string", "minLength": 1},
                    "confidence": {"enum": ["High", "Medium", "Low"]},
                    "fix": {
                        "type": "object",
                        "required": ["status", "diff"],
                        "properties": {
                            "status": {"enum": ["Fixed", "Unfixable", "NoCandidates", "Resolved"]},
                            "diff": {"type": "string"},
                        },
                    },
                },
            },
        },
    },
}


@pytest.fixture
def fig4(tmp_path):
    path = tmp_path / "paper.tex"
    path.write_bytes((DATA / "fig4.tex").read_bytes())
    return path


@pytest.fixture
def clean(tmp_path):
    path = tmp_path / "clean.tex"
    path.write_text(wrap("Nothing wrong here."))
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestCheck:
    """Diagnosis output and exit codes."""

    def test_clean_file(self, capsys, clean):
        assert run(capsys, "check", clean) == (EXIT_OK, "", "")

    def test_fig4_human(self, capsys, fig4):
        code, out, _ = run(capsys, "check", fig4)
        assert code == EXIT_FOUND
        first = out.splitlines()[0]
        assert first == f"{fig4}:9: Compilation error -- line 9 [PackageConflict, High confidence]"
        assert "algorithm2e" in out

    def test_fig4_with_log(self, capsys, fig4):
        code, out, _ = run(capsys, "check", fig4, "--log", LOGS / "env_undefined.log", "--format", "json")
        data = json.loads(out)
        jsonschema.validate(data, DIAGNOSTICS_SCHEMA)
        (diag,) = data["diagnostics"]
        assert (diag["category"], diag["line"], diag["fix"]["status"]) == ("PackageConflict", 9, "Fixed")
        assert f"+{PACKAGE_LINE}" in diag["fix"]["diff"]
        assert code == EXIT_FOUND

    def test_json_schema_on_many_errors(self, capsys, tmp_path):
        path = tmp_path / "many.tex"
        path.write_text(wrap("\\sectoin{A} $x and \\ref{nokey}\n\\begin{tabular}{ll}\na & b & c\\\\\n\\end{tabular}\nα"))
        code, out, _ = run(capsys, "check", path, "--format", "json")
        data = json.loads(out)
        jsonschema.validate(data, DIAGNOSTICS_SCHEMA)
        assert code == EXIT_FOUND and len(data["diagnostics"]) >= 4
        assert data["file"] == str(path)

    def test_missing_file(self, capsys, tmp_path):
        code, out, err = run(capsys, "check", tmp_path / "absent.tex")
        assert code == EXIT_FAILURE and "texdoctor:" in err

    def test_binary_log_rejected(self, capsys, fig4, tmp_path):
        log = tmp_path / "bad.log"
        log.write_bytes(b"! Undefined\x00 control")
        code, _, err = run(capsys, "check", fig4, "--log", log)
        assert code == EXIT_FAILURE and err

    def test_text_format_only_for_bench(self, capsys, fig4):
        with pytest.raises(SystemExit) as info:
            main(["check", str(fig4), "--format", "csv"])
        assert info.value.code == 2

    def test_missing_engine(self, capsys, fig4):
        code, _, err = run(capsys, "check", fig4, "--mode", "engine", "--engine", "/nonexistent/pdflatex")
        assert code == EXIT_FAILURE and err


class TestFix:
    """Suggest, apply and interactive modes."""

    def test_suggest_prints_diff_and_leaves_file(self, capsys, fig4):
        before = fig4.read_bytes()
        code, out, _ = run(capsys, "fix", fig4)
        assert code == EXIT_OK
        assert f"+{PACKAGE_LINE}" in out.splitlines()
        assert fig4.read_bytes() == before and not Path(str(fig4) + ".bak").exists()

    def test_apply_writes_and_backs_up(self, capsys, fig4):
        before = fig4.read_bytes()
        mode = stat.S_IMODE(os.stat(fig4).st_mode)
        code, out, _ = run(capsys, "fix", fig4, "--fix", "apply")
        assert code == EXIT_OK
        assert Path(str(fig4) + ".bak").read_bytes() == before
        lines = fig4.read_text().splitlines()
        assert PACKAGE_LINE in lines and lines.index(PACKAGE_LINE) < lines.index("\\begin{document}")
        assert stat.S_IMODE(os.stat(fig4).st_mode) == mode
        assert run(capsys, "check", fig4)[0] == EXIT_OK
        assert not [p for p in fig4.parent.iterdir() if p.name.startswith(".texdoctor-")]

    def test_apply_json(self, capsys, fig4):
        code, out, _ = run(capsys, "fix", fig4, "--fix", "apply", "--format", "json")
        jsonschema.validate(json.loads(out), DIAGNOSTICS_SCHEMA)
        assert code == EXIT_OK

    def test_read_only_file(self, capsys, fig4):
        fig4.chmod(0o444)
        try:
            before = fig4.read_bytes()
            code, _, err = run(capsys, "fix", fig4, "--fix", "apply")
            assert code == EXIT_FAILURE and "not writable" in err
            assert fig4.read_bytes() == before
        finally:
            fig4.chmod(0o644)

    def test_unfixable_exit_code(self, capsys, tmp_path):
        path = tmp_path / "u.tex"
        path.write_text(wrap("\\qqqqqqqqqq"))
        code, out, _ = run(capsys, "fix", path)
        assert code == EXIT_FOUND and "no valid fix" in out

    def test_interactive_yes(self, capsys, fig4, monkeypatch):
        monkeypatch.setattr("builtins.input", lambda prompt="": "y")
        code, out, _ = run(capsys, "fix", fig4, "--fix", "interactive")
        assert code == EXIT_OK and PACKAGE_LINE in fig4.read_text()
        assert "wrote" in out

    def test_interactive_no_and_eof(self, capsys, fig4, monkeypatch):
        before = fig4.read_bytes()
        monkeypatch.setattr("builtins.input", lambda prompt="": "n")
        run(capsys, "fix", fig4, "--fix", "interactive")
        assert fig4.read_bytes() == before

        def eof(prompt=""):
            raise EOFError

        monkeypatch.setattr("builtins.input", eof)
        run(capsys, "fix", fig4, "--fix", "interactive")
        assert fig4.read_bytes() == before


class TestExplain:
    """Plain explanations."""

    def test_fig4(self, capsys, fig4):
        code, out, _ = run(capsys, "explain", fig4)
        assert code == EXIT_FOUND
        assert out.startswith("Line 9: ") and "algorithm2e" in out

    def test_line_filter(self, capsys, fig4):
        code, out, _ = run(capsys, "explain", fig4, "--line", "3")
        assert out == ""


class TestBench:
    """Benchmark subcommand."""

    def test_csv_to_file(self, capsys, tmp_path):
        target = tmp_path / "r.csv"
        code, out, _ = run(capsys, "bench", "--total", "12", "--format", "csv", "--output", target)
        assert code == EXIT_OK and out == ""
        rows = target.read_text().splitlines()
        assert rows[0] == "category,n,da,fa" and rows[1].startswith("Overall,12,")

    def test_json_deterministic(self, capsys, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run(capsys, "bench", "--per-category", "1", "--format", "json", "-o", a)
        run(capsys, "bench", "--per-category", "1", "--format", "json", "-o", b)
        assert a.read_bytes() == b.read_bytes()

    def test_missing_corpus(self, capsys, tmp_path):
        code, _, err = run(capsys, "bench", "--corpus", tmp_path / "nope", "--total", "6")
        assert code == EXIT_FAILURE and "not found" in err

    def test_config_file(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bench": {"total": 6, "rng_seed": 4}, "format": "csv"}))
        code, out, _ = run(capsys, "bench", "--config", cfg)
        assert code == EXIT_OK and out.splitlines()[1].startswith("Overall,6,")

    def test_bad_config(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bench": {"totl": 6}}))
        assert run(capsys, "bench", "--config", cfg)[0] == EXIT_FAILURE


class TestDb:
    """Package database subcommand."""

    def test_validate_shipped(self, capsys):
        code, out, _ = run(capsys, "db", "validate")
        assert code == EXIT_OK and out.startswith("ok: ")

    def test_validate_broken(self, capsys, tmp_path):
        path = tmp_path / "db.json"
        path.write_text('{"version": 1, "packages": [{"name": "a"}, {"name": "a"}]}')
        code, _, err = run(capsys, "db", "validate", path)
        assert code == EXIT_FAILURE and "invalid package database" in err

    def test_list(self, capsys):
        code, out, _ = run(capsys, "db", "list")
        assert code == EXIT_OK and any(line.startswith("algorithm2e ") for line in out.splitlines())


class TestEntryPoint:
    """The module runs as a program."""

    def test_module_invocation(self, fig4):
        proc = subprocess.run(
            [sys.executable, "-m", "texdoctor.cli", "check", str(fig4)], capture_output=True, text=True, timeout=60
        )
        assert proc.returncode == EXIT_FOUND and "PackageConflict" in proc.stdout
