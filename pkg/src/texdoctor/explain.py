"""Plain-English explanations rendered from a template catalog."""

from __future__ import annotations

from collections.abc import Mapping
from string import Formatter
from typing import TYPE_CHECKING, NamedTuple

if TYPE_CHECKING:
    from .localize import Diagnostic, ErrorCategory


class MissingTemplate(KeyError):
    pass


class Template(NamedTuple):
    message: str
    action: str


_PKG = "PackageConflict"
_UND = "UndefinedControl"
_MATH = "MathMode"
_TAB = "TableFigure"
_REF = "ReferenceError"
_ENC = "EncodingFont"

CATALOG: dict[tuple[str | None, str], Template] = {
    (_PKG, "missing-package-env"): Template(
        "The {token} environment on line {line} comes from the {package} package, but {package} is not loaded.",
        "Add {usepackage} to the preamble.",
    ),
    (_PKG, "missing-package-cmd"): Template(
        "\\{token} on line {line} is defined by the {package} package, which is not loaded.",
        "Add {usepackage} to the preamble.",
    ),
    (_PKG, "env-undefined"): Template(
        "Environment {token} on line {line} is not defined by the document class or any loaded package.",
        "Check the environment name for a typo or load the package that defines it.",
    ),
    (_PKG, "file-not-found"): Template(
        "The file {token} requested on line {line} could not be found.",
        "Check the package name for a typo or install the missing package.",
    ),
    (_PKG, "option-clash"): Template(
        "Package {package} is loaded more than once with different options (line {line}).",
        "Load {package} once and pass all of its options to that single \\usepackage.",
    ),
    (_PKG, "already-defined"): Template(
        "\\{token} is defined twice, so two definitions clash on line {line}.",
        "Rename your command or drop one of the packages that define it.",
    ),
    (_PKG, "package-conflict"): Template(
        "Packages {a} and {b} cannot be used together as loaded (line {line}).",
        "Fix: {hint}.",
    ),
    (_UND, "undefined-cs"): Template(
        "\\{token} on line {line} is not defined by LaTeX, a loaded package, or this document.",
        "Check the spelling of the command or define it with \\newcommand.",
    ),
    (_MATH, "missing-dollar"): Template(
        "Line {line} uses math-only material outside math mode, or a $ delimiter is missing.",
        "Wrap the formula in $...$ or restore the missing $.",
    ),
    (_MATH, "display-math"): Template(
        "A $ inside display math on line {line} does not close the display correctly.",
        "Remove the stray $ or end the display with the matching delimiter.",
    ),
    (_MATH, "extra-brace"): Template(
        "A closing brace on line {line} ends a group that math mode had not finished.",
        "Balance the braces and $ delimiters around line {line}.",
    ),
    (_MATH, "bad-math-delimiter"): Template(
        "A math delimiter on line {line} closes or opens math mode at the wrong place.",
        "Pair each \\( with \\) and each \\[ with \\].",
    ),
    (_MATH, "env-mismatch"): Template(
        "\\begin{{{token}}} from line {begin_line} is closed by \\end{{{end}}}.",
        "Make the \\end name match its \\begin or add the missing \\end{{{token}}}.",
    ),
    (_TAB, "env-mismatch"): Template(
        "\\begin{{{token}}} from line {begin_line} is closed by \\end{{{end}}}.",
        "Make the \\end name match its \\begin or add the missing \\end{{{token}}}.",
    ),
    (_TAB, "extra-alignment-tab"): Template(
        "A table row near line {line} has more cells than its column specification declares.",
        "Remove the extra & or add a column to the specification.",
    ),
    (_TAB, "misplaced-alignment-tab"): Template(
        "An & on line {line} appears outside any table or alignment.",
        "Write \\& for a literal ampersand.",
    ),
    (_TAB, "illegal-array-arg"): Template(
        "The column specification on line {line} contains a character that is not a column type.",
        "Use only valid column types such as l, c, r or p{{width}}.",
    ),
    (_TAB, "not-outer-par"): Template(
        "The float on line {line} is placed inside another float or box, where floats cannot go.",
        "Move the float out of the enclosing box or float.",
    ),
    (_TAB, "float-option"): Template(
        "The float on line {line} has an unknown placement option {token}.",
        "Use placement letters from h, t, b, p and !.",
    ),
    (_TAB, "float-lost"): Template(
        "A float near line {line} was lost because it sits where floats are not allowed.",
        "Move the figure or table out of the surrounding box.",
    ),
    (_TAB, "graphics-not-found"): Template(
        "The graphics file {token} included on line {line} could not be found.",
        "Check the file name and path of the image.",
    ),
    (_REF, "citation-undefined"): Template(
        "Citation key '{token}' on line {line} is not defined in the bibliography.",
        "Correct the key or add a bibliography entry for it.",
    ),
    (_REF, "reference-undefined"): Template(
        "Reference '{token}' on line {line} does not match any \\label.",
        "Correct the key or add the missing \\label.",
    ),
    (_ENC, "unicode-char"): Template(
        "The character {token} ({codepoint}) on line {line} cannot be typeset with the current font setup.",
        "Replace it with its LaTeX command or compile with a Unicode engine.",
    ),
    (_ENC, "invalid-utf8"): Template(
        "Line {line} contains bytes that are not valid UTF-8.",
        "Re-save the file as UTF-8 or declare its real encoding with inputenc.",
    ),
    (_ENC, "font-not-loadable"): Template(
        "A font required near line {line} could not be loaded.",
        "Install the missing font or select a font encoding that provides it.",
    ),
    (_ENC, "encoding-unknown"): Template(
        "The font encoding requested on line {line} does not exist ({token}).",
        "Use a valid encoding such as T1 in the fontenc options.",
    ),
    (_ENC, "encoding-unavailable"): Template(
        "The character behind \\{token} on line {line} needs the T1 font encoding, which is not loaded.",
        "Add \\usepackage[T1]{{fontenc}} to the preamble.",
    ),
    (None, "unclassified"): Template(
        "The compiler reported an error the tool could not classify: {raw}",
        "Inspect the source around line {line}.",
    ),
}


class _Defaults(dict):
    def __missing__(self, key: str) -> str:
        return "?"


def _template(category: ErrorCategory | str | None, pattern: str) -> Template:
    cat = getattr(category, "value", category)
    try:
        return CATALOG[(cat, pattern)]
    except KeyError:
        raise MissingTemplate((cat, pattern)) from None


def _fill(text: str, details: Mapping[str, str]) -> str:
    return Formatter().vformat(text, (), _Defaults(details))


def render_message(category: ErrorCategory | str | None, pattern: str, details: Mapping[str, str]) -> str:
    return _fill(_template(category, pattern).message, details)


def explain(diag: Diagnostic) -> str:
    """Explanation followed by a one-sentence suggested action."""
    t = _template(diag.category, diag.pattern)
    action = _fill(t.action, diag.details)
    return f"{diag.message} {action[0].upper()}{action[1:]}"
