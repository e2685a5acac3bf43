from __future__ import annotations

from pathlib import Path

import pytest

from texdoctor.bench import default_corpus_dir, load_corpus
from texdoctor.latex import SourceDocument
from texdoctor.packagedb import default_db

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def db():
    return default_db()


@pytest.fixture(scope="session")
def seeds():
    return load_corpus(default_corpus_dir())


@pytest.fixture
def fig4_doc():
    return SourceDocument.read(DATA / "fig4.tex")


def doc(text: str, path: str = "t.tex") -> SourceDocument:
    return SourceDocument(text, path)


def wrap(body: str, preamble: str = "") -> str:
    """A minimal article around ``body``."""
    return f"\\documentclass{{article}}\n{preamble}\\begin{{document}}\n{body}\n\\end{{document}}\n"


# -- acceptance criteria summary ------------------------------------------------

CRITERIA: dict[int, tuple[str, str, str]] = {}
STATUS = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or not (report.when == "call" or report.outcome != "passed"):
        return
    number, title = marker.args
    if report.skipped and isinstance(report.longrepr, tuple):
        detail = report.longrepr[2].removeprefix("Skipped: ")
    else:
        detail = dict(report.user_properties).get("measured", "")
    CRITERIA[number] = (STATUS[report.outcome], title, detail)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        status, title, detail = CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {title}" + (f" -- {detail}" if detail else ""))
