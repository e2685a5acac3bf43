"""Structured reading of TeX engine logs (pdfTeX, XeTeX, LuaTeX)."""

from __future__ import annotations

import enum
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

MAX_PRINT_LINE = 79
UNKNOWN_FILE = "unknown"


class Severity(str, enum.Enum):
    ERROR = "Error"
    WARNING = "Warning"
    BADBOX = "BadBox"


@dataclass(frozen=True)
class LogRecord:
    severity: Severity
    message: str
    raw_excerpt: str
    file: str = UNKNOWN_FILE
    reported_line: int | None = None
    token: str | None = None
    package: str | None = None
    pattern: str = "unclassified"
    # extra captured values, e.g. the closing environment of a mismatch
    extra: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.reported_line is not None and self.reported_line < 1:
            raise ValueError("reported_line must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["severity"] = self.severity.value
        d["extra"] = list(self.extra)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> LogRecord:
        d = dict(d)
        d["severity"] = Severity(d["severity"])
        d["extra"] = tuple(d.get("extra", ()))
        return cls(**d)


@dataclass(frozen=True)
class LogReport:
    records: tuple[LogRecord, ...] = ()
    engine: str = "unknown"
    clean: bool = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "clean", not any(r.severity is Severity.ERROR for r in self.records))

    @property
    def errors(self) -> list[LogRecord]:
        return [r for r in self.records if r.severity is Severity.ERROR]

    def to_dict(self) -> dict:
        return {"engine": self.engine, "clean": self.clean, "records": [r.to_dict() for r in self.records]}


def unwrap(raw_log: str, max_line: int = MAX_PRINT_LINE) -> list[str]:
    """Rejoin physical lines that the engine hard-wrapped at ``max_line`` characters."""
    if not raw_log:
        return []
    physical = raw_log.replace("\r\n", "\n").split("\n")
    if physical and physical[-1] == "":
        physical.pop()
    if max_line <= 0:
        return physical
    out: list[str] = []
    buf: str | None = None
    for line in physical:
        buf = line if buf is None else buf + line
        if len(line) != max_line:
            out.append(buf)
            buf = None
    if buf is not None:
        out.append(buf)
    return out


_ENGINES = (
    ("This is pdfTeX", "pdflatex"),
    ("This is XeTeX", "xelatex"),
    ("This is LuaHBTeX", "lualatex"),
    ("This is LuaTeX", "lualatex"),
    ("This is e-TeX", "etex"),
    ("This is TeX,", "tex"),
)

# (pattern id, regex over the joined message); first match wins
_ERROR_PATTERNS: list[tuple[str, re.Pattern[str]]] = [
    ("undefined-cs", re.compile(r"^Undefined control sequence")),
    ("missing-dollar", re.compile(r"^Missing \$ inserted")),
    ("env-undefined", re.compile(r"^LaTeX Error: Environment (?P<token>\S+) undefined")),
    ("file-not-found", re.compile(r"^LaTeX Error: File `(?P<token>[^']+)' not found")),
    ("file-not-found", re.compile(r"^I can't find file `(?P<token>[^']+)'")),
    ("env-mismatch", re.compile(r"^LaTeX Error: \\begin\{(?P<token>[^}]*)\}(?: on input line (?P<x1>\d+))? ended by \\end\{(?P<x2>[^}]*)\}")),
    ("unicode-char", re.compile(r"^(?:Package inputenc|LaTeX) Error: Unicode char(?:acter)? (?P<token>\S+) \((?P<x1>U\+[0-9A-Fa-f]+)\)")),
    ("invalid-utf8", re.compile(r"^Package inputenc Error: Invalid UTF-8 byte")),
    ("font-not-loadable", re.compile(r"^Font (?P<token>\S+?)(?:=\S+)?(?: at \S+)? not loadable")),
    ("encoding-unknown", re.compile(r"^Package fontenc Error: Encoding file `(?P<token>[^']+)' not found")),
    ("encoding-unknown", re.compile(r"^LaTeX Error: Encoding scheme `(?P<token>[^']+)' unknown")),
    ("encoding-unavailable", re.compile(r"^LaTeX Error: Command \\(?P<token>\S+) unavailable in encoding (?P<x1>\S+?)\.?$")),
    ("extra-alignment-tab", re.compile(r"^Extra alignment tab has been changed to \\cr")),
    ("misplaced-alignment-tab", re.compile(r"^Misplaced alignment tab character &")),
    ("illegal-array-arg", re.compile(r"^LaTeX Error: Illegal character in array arg")),
    ("not-outer-par", re.compile(r"^LaTeX Error: Not in outer par mode")),
    ("float-option", re.compile(r"^LaTeX Error: Unknown float option `(?P<token>[^']*)'")),
    ("float-lost", re.compile(r"^LaTeX Error: Float\(s\) lost")),
    ("display-math", re.compile(r"^Display math should end with \$\$")),
    ("extra-brace", re.compile(r"^Extra \}, or forgotten \$")),
    ("bad-math-delimiter", re.compile(r"^LaTeX Error: Bad math environment delimiter")),
    ("option-clash", re.compile(r"^LaTeX Error: Option clash for package (?P<package>[^\s.]+)")),
    ("already-defined", re.compile(r"^LaTeX Error: Command \\(?P<token>\S+?) already defined")),
    ("package-error", re.compile(r"^(?:Fatal )?Package (?P<package>\S+) Error: ")),
]

_CITATION = re.compile(
    r"^(?:LaTeX|Package natbib|Package biblatex) Warning: Citation [`'](?P<token>[^']*)' "
    r"(?:on page \S+ )?undefined(?: on input line (?P<line>\d+))?"
)
_REFERENCE = re.compile(
    r"^LaTeX Warning: Reference [`'](?P<token>[^']*)' (?:on page \S+ )?undefined(?: on input line (?P<line>\d+))?"
)
_WARNING = re.compile(r"^(?:LaTeX|LaTeX Font|Package (?P<package>\S+)|Class \S+) Warning: ")
_INPUT_LINE = re.compile(r"on input line (\d+)")
_BADBOX = re.compile(
    r"^(?P<kind>Overfull|Underfull) \\(?P<box>[hv]box) \((?P<detail>[^)]*)\)"
    r"(?:.*?(?:at lines? (?P<line>\d+)(?:--\d+)?|detected at line (?P<line2>\d+)))?"
)
_LINE_CONTEXT = re.compile(r"^l\.(?P<line>\d+)(?: (?P<text>.*))?$")
_CS_AT_END = re.compile(r"\\(?:[A-Za-z@]+|.)$")
_FILE_OPEN = re.compile(
    r"\((?P<file>(?:\.{1,2}/|/|[A-Za-z]:[\\/]|~/)[^\s()]*|[^\s()\[\]{}<>\"']+\.(?:tex|sty|cls|clo|cfg|def|fd|aux|toc|out|bbl|ldf|dfu|ltx|lbx|bbx|cbx|dbx|map|enc|nav|snm|lof|lot|ind|mkii))"
)


def _detect_engine(lines: list[str]) -> str:
    for line in lines[:3]:
        for prefix, engine in _ENGINES:
            if line.startswith(prefix):
                return engine
    return "unknown"


class _FileStack:
    def __init__(self) -> None:
        self.stack: list[str | None] = []

    def feed(self, line: str) -> None:
        i = 0
        n = len(line)
        while i < n:
            c = line[i]
            if c == "(":
                m = _FILE_OPEN.match(line, i)
                if m:
                    self.stack.append(m.group("file"))
                    i = m.end()
                    continue
                self.stack.append(None)
            elif c == ")":
                if self.stack:
                    self.stack.pop()
            i += 1

    @property
    def top(self) -> str:
        for f in reversed(self.stack):
            if f is not None:
                return f
        return UNKNOWN_FILE


def _error_block(lines: list[str], i: int) -> tuple[int, int | None, int | None]:
    """Return (end index, index of the l.N line, reported line) for an error at ``i``."""
    j = i + 1
    limit = min(len(lines), i + 40)
    while j < limit:
        line = lines[j]
        m = _LINE_CONTEXT.match(line)
        if m:
            end = j + 2
            while end < len(lines) and _help_line(lines[end]):
                end += 1
            return min(end, len(lines)), j, int(m.group("line"))
        if line.startswith("!") and not line.startswith("! Emergency stop"):
            return j, None, None
        j += 1
    end = i + 1
    while end < len(lines) and _help_line(lines[end]):
        end += 1
    return end, None, None


def _help_line(line: str) -> bool:
    # help text runs to a blank line; a line opening or closing a file belongs to the stack
    return bool(line.strip()) and not line.startswith(("!", "(", ")"))


def _continuation(lines: list[str], i: int, package: str | None) -> tuple[str, int]:
    """Join ``(pkg)``-prefixed continuation lines following line ``i``."""
    text = lines[i]
    j = i + 1
    if package:
        prefix = f"({package})"
        while j < len(lines) and lines[j].startswith(prefix):
            text += " " + lines[j][len(prefix):].strip()
            j += 1
    return text, j


def parse_log(raw_log: str | bytes, max_line: int = MAX_PRINT_LINE) -> LogReport:
    """Parse a TeX log into records. Never raises on malformed input."""
    if isinstance(raw_log, bytes):
        raw_log = raw_log.decode("utf-8", "replace")
    lines = unwrap(raw_log, max_line)
    files = _FileStack()
    records: list[LogRecord] = []
    i = 0
    n = len(lines)
    while i < n:
        line = lines[i]
        if line.startswith("!"):
            if line.startswith("! Emergency stop") and records and records[-1].severity is Severity.ERROR:
                end, _, _ = _error_block(lines, i)
                i = max(end, i + 1)
                continue
            body = line[1:].strip()
            pkg_match = re.match(r"(?:Fatal )?Package (\S+) Error: ", body)
            message, after = _continuation(lines, i, pkg_match.group(1) if pkg_match else None)
            message = message[1:].strip()
            end, ctx_index, reported = _error_block(lines, i)
            end = max(end, after)
            pattern, token, package, extra = "unclassified", None, None, ()
            for pid, rx in _ERROR_PATTERNS:
                m = rx.search(message)
                if m:
                    pattern = pid
                    groups = m.groupdict()
                    token = groups.get("token")
                    package = groups.get("package")
                    extra = tuple(v for k, v in sorted(groups.items()) if k.startswith("x") and v)
                    break
            if package is None and pkg_match:
                package = pkg_match.group(1)
            if pattern == "file-not-found" and token and token.endswith(".sty"):
                package = token[:-4]
            if pattern == "undefined-cs":
                first = next((lines[k] for k in range(i + 1, min(end, n)) if lines[k].strip()), "")
                ctx = _LINE_CONTEXT.match(first)
                text = (ctx.group("text") or "") if ctx else re.sub(r"^<[^>]*>\s?", "", first)
                m = _CS_AT_END.search(text.rstrip())
                if m:
                    token = m.group(0)[1:]
            records.append(
                LogRecord(
                    severity=Severity.ERROR,
                    message=message if pattern != "unclassified" else "unclassified",
                    raw_excerpt="\n".join(lines[i:end]),
                    file=files.top,
                    reported_line=reported,
                    token=token,
                    package=package,
                    pattern=pattern,
                    extra=extra,
                )
            )
            i = max(end, i + 1)
            continue

        m = _BADBOX.match(line)
        if m:
            end = i + 1
            while end < n and lines[end].strip():
                end += 1
            ln = m.group("line") or m.group("line2")
            records.append(
                LogRecord(
                    severity=Severity.BADBOX,
                    message=f"{m.group('kind')} \\{m.group('box')} ({m.group('detail')})",
                    raw_excerpt="\n".join(lines[i:end]),
                    file=files.top,
                    reported_line=int(ln) if ln and int(ln) >= 1 else None,
                    pattern=f"{m.group('kind').lower()}-{m.group('box')}",
                )
            )
            i = end
            continue

        m = _WARNING.match(line)
        if m:
            package = m.group("package")
            message, after = _continuation(lines, i, package)
            # LaTeX warnings continue on lines without a prefix until a blank line or full stop
            while not package and after < n and lines[after].strip() and not message.rstrip().endswith(".") \
                    and not lines[after].startswith(("!", "(", ")", "LaTeX", "Package", "Overfull", "Underfull")):
                message += " " + lines[after].strip()
                after += 1
            cite = _CITATION.match(message)
            ref = _REFERENCE.match(message)
            hit = cite or ref
            line_match = _INPUT_LINE.search(message)
            reported = int(line_match.group(1)) if line_match else None
            records.append(
                LogRecord(
                    severity=Severity.WARNING,
                    message=message,
                    raw_excerpt="\n".join(lines[i:after]),
                    file=files.top,
                    reported_line=reported if reported and reported >= 1 else None,
                    token=hit.group("token") if hit else None,
                    package=package,
                    pattern="citation-undefined" if cite else "reference-undefined" if ref else "warning",
                )
            )
            for k in range(i, after):
                files.feed(lines[k])
            i = after
            continue

        files.feed(line)
        i += 1
    return LogReport(tuple(records), _detect_engine(lines))


def read_log(path: str | Path, max_line: int = MAX_PRINT_LINE) -> LogReport:
    return parse_log(Path(path).read_bytes(), max_line)
