"""Minimal text patches over a SourceDocument."""

from __future__ import annotations

from dataclasses import dataclass

from .source import SourceDocument, Span


class PatchError(ValueError):
    pass


class OverlappingEdits(PatchError):
    pass


class SpanOutOfRange(PatchError):
    pass


@dataclass(frozen=True)
class Edit:
    span: Span
    replacement: str

    @classmethod
    def insert(cls, doc: SourceDocument, offset: int, text: str) -> Edit:
        return cls(doc.span(offset, offset), text)

    @classmethod
    def replace(cls, doc: SourceDocument, start: int, end: int, text: str) -> Edit:
        return cls(doc.span(start, end), text)


@dataclass(frozen=True)
class Patch:
    edits: tuple[Edit, ...]
    description: str

    def __post_init__(self) -> None:
        if not self.description:
            raise ValueError("patch description must be non-empty")
        object.__setattr__(self, "edits", tuple(self.edits))

    def sorted_edits(self) -> list[Edit]:
        return sorted(self.edits, key=lambda e: (e.span.start, e.span.end))

    def check(self, length: int) -> None:
        for e in self.edits:
            if e.span.end > length:
                raise SpanOutOfRange(f"edit {e.span.start}..{e.span.end} exceeds document length {length}")
        ordered = self.sorted_edits()
        for a, b in zip(ordered, ordered[1:]):
            same_point = a.span.start == a.span.end == b.span.start == b.span.end
            if a.span.end > b.span.start or same_point:
                raise OverlappingEdits(f"edits at {a.span.start}..{a.span.end} and {b.span.start}..{b.span.end} overlap")

    def map_offset(self, offset: int) -> int:
        """Where ``offset`` of the original text lands after the patch."""
        shift = 0
        for e in self.edits:
            if e.span.end <= offset and not (e.span.start == e.span.end == offset):
                shift += len(e.replacement) - (e.span.end - e.span.start)
            elif e.span.start < offset < e.span.end:
                return e.span.start + shift + len(e.replacement)
        return offset + shift


def apply_patch(doc: SourceDocument, patch: Patch) -> SourceDocument:
    """Return a new document with ``patch`` applied; ``doc`` is left untouched."""
    patch.check(len(doc.text))
    text = doc.text
    for e in sorted(patch.edits, key=lambda e: e.span.start, reverse=True):
        text = text[: e.span.start] + e.replacement + text[e.span.end :]
    return doc.with_text(text)
