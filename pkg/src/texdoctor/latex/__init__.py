"""LaTeX source model: lossless parsing, rendering, location and patching."""

from .nodes import Ast, AstNode, ErrorKind, NodeKind, PackageUse, locate, render, render_node
from .parser import parse
from .patch import Edit, OverlappingEdits, Patch, PatchError, SpanOutOfRange, apply_patch
from .source import SourceDocument, Span

__all__ = [
    "Ast", "AstNode", "Edit", "ErrorKind", "NodeKind", "OverlappingEdits", "PackageUse", "Patch",
    "PatchError", "SourceDocument", "Span", "SpanOutOfRange", "apply_patch", "locate", "parse",
    "render", "render_node",
]
