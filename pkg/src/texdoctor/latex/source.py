"""Source documents and spans.

Text is decoded as UTF-8 with ``surrogateescape`` so that invalid bytes survive
as lone surrogates and re-encode to the original bytes. All offsets are indices
into the decoded string.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from pathlib import Path

ENCODING = "utf-8"
ERRORS = "surrogateescape"


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    line: int = 1

    def __post_init__(self) -> None:
        if not 0 <= self.start <= self.end:
            raise ValueError(f"invalid span {self.start}..{self.end}")

    def __len__(self) -> int:
        return self.end - self.start

    def contains(self, other: Span) -> bool:
        return self.start <= other.start and other.end <= self.end

    def intersects(self, other: Span) -> bool:
        if self.start == self.end or other.start == other.end:
            return self.start <= other.start <= self.end or other.start <= self.start <= other.end
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class SourceDocument:
    text: str
    path: str = "<string>"
    line_starts: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        starts = [0]
        find = self.text.find
        i = find("\n")
        while i != -1:
            starts.append(i + 1)
            i = find("\n", i + 1)
        object.__setattr__(self, "line_starts", tuple(starts))

    @classmethod
    def from_bytes(cls, data: bytes, path: str = "<bytes>") -> SourceDocument:
        return cls(data.decode(ENCODING, ERRORS), path)

    @classmethod
    def read(cls, path: str | Path) -> SourceDocument:
        return cls.from_bytes(Path(path).read_bytes(), str(path))

    def to_bytes(self) -> bytes:
        return self.text.encode(ENCODING, ERRORS)

    def __len__(self) -> int:
        return len(self.text)

    @property
    def line_count(self) -> int:
        return len(self.line_starts)

    def line_of(self, offset: int) -> int:
        """1-based line containing ``offset`` (offsets at EOF belong to the last line)."""
        return bisect.bisect_right(self.line_starts, offset)

    def line_bounds(self, line: int) -> tuple[int, int]:
        """Offsets ``[start, end)`` of a line, newline included."""
        if not 1 <= line <= self.line_count:
            raise IndexError(line)
        start = self.line_starts[line - 1]
        end = self.line_starts[line] if line < self.line_count else len(self.text)
        return start, end

    def line_text(self, line: int) -> str:
        start, end = self.line_bounds(line)
        return self.text[start:end].rstrip("\r\n")

    def span(self, start: int, end: int) -> Span:
        return Span(start, end, self.line_of(start))

    def line_span(self, line: int) -> Span:
        start, end = self.line_bounds(line)
        content_end = start + len(self.text[start:end].rstrip("\r\n"))
        return Span(start, content_end, line)

    def with_text(self, text: str) -> SourceDocument:
        return SourceDocument(text, self.path)
