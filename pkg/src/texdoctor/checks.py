"""Static checks that emulate what a TeX engine would report.

The checks walk the AST and write their findings as a pdfTeX-style log, which
is then read back with the ordinary log parser. Diagnosis and validation
therefore go through exactly one code path whether or not an engine ran.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path

from .latex import Ast, AstNode, ErrorKind, NodeKind, SourceDocument, parse
from .latex.nodes import MATH_ENVIRONMENTS
from .log import LogReport, parse_log
from .packagedb import ConflictKind, PackageDb, SymbolKind

STATIC_BANNER = "This is pdfTeX, Version 3.141592653-2.6-1.40.25 (texdoctor static check)"

STANDARD_CLASSES = frozenset({"article", "report", "book", "letter", "minimal", "proc"})

MATH_ONLY_COMMANDS = frozenset(
    """alpha beta gamma delta epsilon varepsilon zeta eta theta vartheta iota kappa lambda mu nu xi
    pi varpi rho varrho sigma varsigma tau upsilon phi varphi chi psi omega Gamma Delta Theta
    Lambda Xi Pi Sigma Upsilon Phi Psi Omega leq geq neq le ge ne ll gg approx equiv sim simeq
    cong propto pm mp times div cdot ast star circ bullet oplus otimes odot in notin ni subset
    supset subseteq supseteq cup cap setminus emptyset varnothing forall exists nexists neg lnot
    infty partial nabla prime rightarrow leftarrow Rightarrow Leftarrow leftrightarrow
    Leftrightarrow to gets mapsto longrightarrow Longrightarrow implies iff uparrow downarrow
    frac dfrac tfrac binom sqrt sum prod int oint iint lim limsup liminf sup inf max min log ln
    exp sin cos tan det dim ker arg gcd mathbb mathbf mathrm mathcal mathit mathsf mathtt
    mathfrak hat bar vec widehat widetilde overline underbrace overbrace cdots vdots ddots left
    right langle rangle lfloor rfloor lceil rceil mid parallel perp ell hbar wp aleph leqslant
    geqslant lesssim gtrsim subsetneq operatorname displaystyle boldsymbol""".split()
)

# commands whose arguments are file names, keys or options rather than text
LITERAL_ARG_COMMANDS = frozenset(
    """includegraphics input include includeonly bibliography bibliographystyle addbibresource
    graphicspath lstinputlisting hypersetup newcounter setcounter addtocounter stepcounter
    pagestyle thispagestyle pagenumbering bibitem definecolor usetikzlibrary captionsetup
    setlist label ref eqref pageref cite nocite url href path nolinkurl newcolumntype
    DeclareGraphicsExtensions lstset tikzset sisetup geometry color textcolor colorbox
    setmainfont setsansfont setmonofont newfontfamily crefname Crefname begin end""".split()
)
TEXT_ARG_COMMANDS = frozenset(
    "text mbox textrm textbf textit texttt textsf textnormal textup intertext hbox fbox".split()
)
DEFINING_COMMANDS = frozenset(
    "newcommand renewcommand providecommand DeclareMathOperator def gdef edef xdef newenvironment "
    "renewenvironment DeclareRobustCommand".split()
)
ALIGNMENT_ENVIRONMENTS = frozenset(
    """tabular tabular* tabularx longtable array align align* alignat alignat* flalign flalign*
    eqnarray eqnarray* aligned alignedat split cases dcases dcases* matrix pmatrix bmatrix
    Bmatrix vmatrix Vmatrix smallmatrix tabu supertabular xtabular""".split()
)
TABULAR_ENVIRONMENTS = frozenset({"tabular", "tabular*", "tabularx", "longtable", "array"})
INNER_MATH_ENVIRONMENTS = frozenset(
    """aligned alignedat gathered split cases dcases dcases* matrix pmatrix bmatrix Bmatrix vmatrix
    Vmatrix smallmatrix subequations""".split()
)
FLOAT_ENVIRONMENTS = frozenset({"figure", "figure*", "table", "table*", "algorithm", "algorithm*"})
BOX_ENVIRONMENTS = frozenset({"minipage", "tabular", "tabular*", "tabularx", "array", "lrbox"})
BOX_COMMANDS = frozenset({"parbox", "mbox", "fbox", "makebox", "framebox", "raisebox", "savebox", "sbox"})
FLOAT_PLACEMENT = frozenset("htbpH!")

# characters that need the T1 font encoding, mapped to their LaTeX command
T1_ONLY = {"þ": "th", "Þ": "TH", "ð": "dh", "Ð": "DH", "ŋ": "ng", "Ŋ": "NG", "«": "guillemotleft", "»": "guillemotright"}
EXTRA_SUPPORTED = frozenset("–—‘’“”„…†‡•€™‰′″‹›·")
KNOWN_ENCODINGS = ("OT1", "T1", "LY1", "T2A", "T2B", "T2C", "T5", "LGR", "OT2", "OT4", "TS1", "X2", "OML", "OMS", "OMX", "T3")

COLUMN_TOKEN = re.compile(r"\s*(?:([lcr|])|([pmbX])\s*(\{[^{}]*\})?|([@!<>])\s*(\{(?:[^{}]|\{[^{}]*\})*\})?|\*\s*\{(\d+)\}\s*\{((?:[^{}]|\{[^{}]*\})*)\}|(.))", re.S)


@dataclass(frozen=True)
class _Ctx:
    math: bool = False
    literal: bool = False
    defbody: bool = False
    envs: tuple[AstNode, ...] = ()
    boxed: bool = False


@dataclass(order=True)
class Finding:
    offset: int
    seq: int
    text: str


class _Checker:
    def __init__(self, ast: Ast, db: PackageDb) -> None:
        self.ast = ast
        self.db = db
        self.doc = ast.source
        self.text = ast.source.text
        self.findings: list[Finding] = []
        self.loaded = [p.name for p in ast.packages]
        self.active = db.closure(self.loaded)

    # -- output ---------------------------------------------------------
    def context(self, offset: int, end: int | None = None) -> str:
        line = self.doc.line_of(offset)
        start, _ = self.doc.line_bounds(line)
        stop = end if end is not None else offset
        stop = min(stop, start + len(self.doc.line_text(line)))
        snippet = self.text[start:stop].replace("\t", " ")
        before = f"l.{line} {snippet}".rstrip() if snippet.strip() else f"l.{line}"
        # pdfTeX prints the rest of the line below, indented past the context; never empty
        rest = self.doc.line_text(line)[stop - start :].replace("\t", " ").rstrip()
        return f"{before}\n{' ' * len(before)}{rest}"

    def error(self, offset: int, message: str, end: int | None = None, extra: str = "") -> None:
        lines = [f"! {message}"]
        if extra:
            lines.append(extra)
        lines.append(self.context(offset, end))
        self.findings.append(Finding(offset, len(self.findings), "\n".join(lines) + "\n\n"))

    def warning(self, offset: int, message: str) -> None:
        self.findings.append(Finding(offset, len(self.findings), message + "\n\n"))

    # -- walk -----------------------------------------------------------
    def run(self) -> str:
        self.visit(self.ast.root, _Ctx())
        self.check_packages()
        self.check_environment_balance()
        self.check_references()
        self.check_encoding()
        name = Path(self.doc.path).name if self.doc.path and not self.doc.path.startswith("<") else "texput.tex"
        body = "".join(f.text for f in sorted(self.findings))
        return f"{STATIC_BANNER}\n(./{name}\n{body})\n"

    def visit(self, node: AstNode, ctx: _Ctx) -> None:
        kind = node.kind
        if kind is NodeKind.TEXT:
            self.check_text(node, ctx)
            return
        if kind is NodeKind.COMMENT:
            return
        if kind in (NodeKind.MATH_INLINE, NodeKind.MATH_DISPLAY) or (
            kind is NodeKind.ERROR and node.error is ErrorKind.UNTERMINATED_MATH
        ):
            if kind is NodeKind.ERROR:
                self.unterminated_math(node)
            ctx = _Ctx(True, ctx.literal, ctx.defbody, ctx.envs, ctx.boxed)
        elif kind is NodeKind.ERROR and node.error is ErrorKind.STRAY_DOLLAR:
            if any(e.name in MATH_ENVIRONMENTS for e in ctx.envs):
                self.error(node.span.start, "Display math should end with $$.", node.span.end)
            else:
                self.error(node.span.start, "Missing $ inserted.", node.span.end)
            return
        elif kind is NodeKind.ERROR and node.error is ErrorKind.UNMATCHED_MATH_DELIMITER:
            self.error(node.span.start, "LaTeX Error: Bad math environment delimiter.", node.span.end)
            return
        elif kind is NodeKind.ERROR and node.error is ErrorKind.UNMATCHED_BRACE:
            self.error(node.span.start, "Too many }'s.", node.span.end)
            return
        elif kind is NodeKind.ERROR and node.error is ErrorKind.UNCLOSED_GROUP and not ctx.literal:
            self.error(node.span.start, "Paragraph ended before a group was complete.", node.span.start + 1)
        elif kind in (NodeKind.ENVIRONMENT, NodeKind.ERROR) and node.begin is not None:
            ctx = self.enter_environment(node, ctx)
        elif kind in (NodeKind.COMMAND, NodeKind.CITE_REF, NodeKind.LABEL_REF, NodeKind.PACKAGE_DECL, NodeKind.DOCUMENT_CLASS_DECL):
            ctx = self.enter_command(node, ctx)
            if ctx is None:
                return
        for child in node.children:
            if child.arg is not None and node.kind is not NodeKind.GROUP and not (node.begin is not None and child is node.begin):
                self.visit(child, self.arg_ctx(node, child, ctx))
            else:
                self.visit(child, ctx)

    def arg_ctx(self, owner: AstNode, arg: AstNode, ctx: _Ctx) -> _Ctx:
        name = (owner.macro or owner.name or "").rstrip("*")
        if owner.kind in (NodeKind.CITE_REF, NodeKind.LABEL_REF, NodeKind.PACKAGE_DECL, NodeKind.DOCUMENT_CLASS_DECL):
            return _Ctx(ctx.math, True, ctx.defbody, ctx.envs, ctx.boxed)
        if owner.kind is NodeKind.COMMAND and name in LITERAL_ARG_COMMANDS:
            return _Ctx(ctx.math, True, ctx.defbody, ctx.envs, ctx.boxed)
        if owner.kind is NodeKind.COMMAND and name in DEFINING_COMMANDS:
            return _Ctx(False, ctx.literal, True, ctx.envs, ctx.boxed)
        if owner.kind is NodeKind.COMMAND and name == "ensuremath":
            return _Ctx(True, ctx.literal, ctx.defbody, ctx.envs, ctx.boxed)
        if owner.kind is NodeKind.COMMAND and name in TEXT_ARG_COMMANDS:
            return _Ctx(False, ctx.literal, ctx.defbody, ctx.envs, ctx.boxed or name in BOX_COMMANDS)
        if owner.kind is NodeKind.COMMAND and name in BOX_COMMANDS:
            return _Ctx(ctx.math, ctx.literal, ctx.defbody, ctx.envs, True)
        if owner.kind is not NodeKind.COMMAND:
            # optional/mandatory arguments of environments (column specs, placement)
            return _Ctx(ctx.math, True, ctx.defbody, ctx.envs, ctx.boxed)
        return ctx

    # -- symbols --------------------------------------------------------
    def symbols_checkable(self) -> bool:
        if getattr(self, "_checkable", None) is None:
            cls = self.ast.document_class
            unknown_pkg = any(p not in self.db for p in self.loaded)
            unknown_cls = cls is not None and cls not in STANDARD_CLASSES
            external = any(n.kind is NodeKind.COMMAND and n.name in ("input", "include") for n in self.ast.nodes)
            self._checkable = not (unknown_pkg or unknown_cls or external)
        return self._checkable

    def defined_elsewhere(self) -> set[str]:
        if getattr(self, "_local", None) is None:
            names = set(self.ast.macros)
            for m in re.finditer(r"\\(?:let|global\\let|newlength|newsavebox|newif|newcount|newdimen|newskip|newtoks|newbox|chardef|mathchardef)\s*\{?\s*\\([A-Za-z@]+)", self.text):
                names.add(m.group(1))
            for m in re.finditer(r"\\newcounter\s*\{([A-Za-z]+)\}", self.text):
                names.add("the" + m.group(1))
            for m in re.finditer(r"\\newif\s*\\if([A-Za-z]+)", self.text):
                names.update({m.group(1) + "true", m.group(1) + "false"})
            for m in re.finditer(r"\\SetKw(?:Function|InOut|Input|Output|Data|Prog|Block|For|If|Switch|Repeat)?\s*\{([A-Za-z]+)\}", self.text):
                names.add(m.group(1))
            self._local = names
        return self._local

    def command_defined(self, name: str) -> bool:
        if name in self.defined_elsewhere():
            return True
        return self.db.available(SymbolKind.COMMAND, name, self.active)

    def environment_defined(self, name: str) -> bool:
        if name in self.ast.environments:
            return True
        if self.db.available(SymbolKind.ENVIRONMENT, name, self.active):
            return True
        # environments created by \newtheorem-like declarations are recorded in ast.environments;
        # starred forms of known environments are accepted only when declared explicitly
        return False

    def enter_command(self, node: AstNode, ctx: _Ctx) -> _Ctx | None:
        name = node.macro or node.name or ""
        if node.arg == "m" and node.kind is NodeKind.COMMAND:
            return None
        base = name.rstrip("*")
        if ctx.defbody or not re.fullmatch(r"[A-Za-z]+\*?", name):
            return ctx
        if self.symbols_checkable() and base not in ("begin", "end") and not self.command_defined(base):
            self.error(node.span.start, "Undefined control sequence.", node.span.start + 1 + len(base))
        elif not ctx.math and not ctx.literal and base in MATH_ONLY_COMMANDS:
            self.error(node.span.start, "Missing $ inserted.", node.span.start + 1 + len(base))
        return ctx

    def enter_environment(self, node: AstNode, ctx: _Ctx) -> _Ctx:
        name = node.name or ""
        begin = node.begin
        if self.symbols_checkable() and not self.environment_defined(name):
            self.error(begin.span.start, f"LaTeX Error: Environment {name} undefined.", begin.span.end)
        if name in FLOAT_ENVIRONMENTS and (name.rstrip("*") in ("figure", "table") or self.environment_defined(name)):
            self.check_float(node, ctx)
        if name in TABULAR_ENVIRONMENTS:
            self.check_tabular(node)
        math = ctx.math or name in MATH_ENVIRONMENTS or name in INNER_MATH_ENVIRONMENTS
        boxed = ctx.boxed or name in BOX_ENVIRONMENTS or name in FLOAT_ENVIRONMENTS
        return _Ctx(math, ctx.literal, ctx.defbody, ctx.envs + (node,), boxed)

    # -- math -----------------------------------------------------------
    def unterminated_math(self, node: AstNode) -> None:
        """TeX notices the missing ``$`` where the paragraph ends."""
        opener = node.name or "$"
        if opener in ("\\(", "\\["):
            self.error(node.span.start, "LaTeX Error: Bad math environment delimiter.", node.span.start + 2)
            return
        m = re.compile(r"\n[ \t\r]*\n|\\end\s*\{|\\par\b").search(self.text, node.span.end)
        at = m.start() + 1 if m else len(self.text)
        at = min(at, len(self.text))
        if m and self.text[m.start()] != "\n":
            at = m.start()
        line = self.doc.line_of(at) if at < len(self.text) else self.doc.line_count
        start, _ = self.doc.line_bounds(line)
        self.error(start, "Missing $ inserted.", start)

    def check_text(self, node: AstNode, ctx: _Ctx) -> None:
        if ctx.math or ctx.literal or ctx.defbody:
            return
        raw = node.parts[0] if node.parts and isinstance(node.parts[0], str) else ""
        base = node.span.start
        for i, ch in enumerate(raw):
            if ch in "^_":
                self.error(base + i, "Missing $ inserted.", base + i + 1)
                return
        if "&" in raw and not any(e.name in ALIGNMENT_ENVIRONMENTS for e in ctx.envs):
            i = raw.index("&")
            self.error(base + i, "Misplaced alignment tab character &.", base + i + 1)

    # -- floats and tables ----------------------------------------------
    def check_float(self, node: AstNode, ctx: _Ctx) -> None:
        begin = node.begin
        if ctx.boxed:
            self.error(begin.span.start, "LaTeX Error: Not in outer par mode.", begin.span.end)
        opts = [a for a in node.args if a.arg == "o"]
        if opts:
            spec = opts[0].inner_text().strip()
            allowed = FLOAT_PLACEMENT if "float" in self.active else FLOAT_PLACEMENT - {"H"}
            bad = next((c for c in spec if c not in allowed and not c.isspace()), None)
            if bad is not None:
                self.error(begin.span.start, f"LaTeX Error: Unknown float option `{bad}'.", opts[0].span.end)

    def column_spec(self, node: AstNode) -> AstNode | None:
        mand = [a for a in node.args if a.arg == "m"]
        if node.name == "tabular*" or node.name == "tabularx":
            return mand[1] if len(mand) > 1 else None
        return mand[0] if mand else None

    def count_columns(self, spec: str) -> tuple[int, str | None]:
        """Number of columns in a tabular preamble and the first illegal character.

        Illegal characters are skipped without counting, as LaTeX does after
        reporting them."""
        legal_extra = set()
        if self.active & {"array", "tabularx", "longtable", "mathtools", "siunitx"}:
            legal_extra |= set("mb><!")
        if "tabularx" in self.active:
            legal_extra.add("X")
        if "siunitx" in self.active:
            legal_extra.add("S")
        custom = set(re.findall(r"\\newcolumntype\s*\{(.)\}", self.text))
        n = 0
        pos = 0
        first_bad: str | None = None
        spec = spec.strip()
        while pos < len(spec):
            m = COLUMN_TOKEN.match(spec, pos)
            if m is None or m.end() == pos:
                break
            pos = m.end()
            simple, para, _, inter, _, rep, sub, other = m.groups()
            if simple:
                n += simple != "|"
            elif para:
                if para in "mbX" and para not in legal_extra:
                    first_bad = first_bad or para
                else:
                    n += 1
            elif inter:
                if inter != "@" and inter not in legal_extra:
                    first_bad = first_bad or inter
            elif rep:
                k, bad = self.count_columns(sub)
                first_bad = first_bad or bad
                n += int(rep) * k
            elif other is not None and not other.isspace():
                if other in custom or other in legal_extra:
                    n += 1
                else:
                    first_bad = first_bad or other
        return n, first_bad

    def rows(self, node: AstNode) -> list[list[tuple[int, int]]]:
        """Cells per row as lists of (offset of the ``&`` or row start, span count)."""
        rows: list[list[tuple[int, int]]] = [[]]
        head = {id(a) for a in node.args} | {id(node.begin)}
        for part in node.children:
            if id(part) in head or (part.kind is NodeKind.COMMAND and part.name == "end"):
                continue
            if part.kind is NodeKind.COMMAND and part.name in ("\\", "tabularnewline"):
                rows.append([])
            elif part.kind is NodeKind.COMMAND and part.name == "multicolumn":
                mand = [a for a in part.args if a.arg == "m"]
                try:
                    span = int(mand[0].inner_text().strip()) if mand else 1
                except ValueError:
                    span = 1
                rows[-1].append((-1, span - 1))
            elif part.kind is NodeKind.TEXT:
                raw = part.parts[0]
                for i, ch in enumerate(raw):
                    if ch == "&":
                        rows[-1].append((part.span.start + i, 1))
        return rows

    def check_tabular(self, node: AstNode) -> None:
        spec_node = self.column_spec(node)
        if spec_node is None or spec_node.is_error:
            return
        ncols, bad = self.count_columns(spec_node.inner_text())
        if bad is not None:
            self.error(spec_node.span.start, "LaTeX Error: Illegal character in array arg.", spec_node.span.end)
        if ncols == 0:
            return
        for row in self.rows(node):
            cells = 1
            for offset, width in row:
                cells += width
                if cells > ncols and offset >= 0:
                    self.error(offset, "Extra alignment tab has been changed to \\cr.", offset + 1)
                    break

    # -- environments ---------------------------------------------------
    def check_environment_balance(self) -> None:
        handled: set[int] = set()
        for path in self._error_paths(ErrorKind.UNMATCHED_END):
            node = path[-1]
            envs = [n for n in path[:-1] if n.begin is not None]
            if envs:
                owner = envs[-1]
                handled.add(id(owner))
                begin_line = self.doc.line_of(owner.span.start)
                self.error(
                    node.span.start,
                    f"LaTeX Error: \\begin{{{owner.name}}} on input line {begin_line} ended by \\end{{{node.name}}}.",
                    node.span.end,
                )
            else:
                self.error(node.span.start, f"LaTeX Error: \\begin{{document}} ended by \\end{{{node.name}}}.", node.span.end)
        for path in self._error_paths(ErrorKind.UNCLOSED_ENVIRONMENT):
            node = path[-1]
            if id(node) in handled or node.begin is None:
                continue
            begin_line = self.doc.line_of(node.span.start)
            m = re.compile(r"\\end\s*\{([^{}]*)\}").match(self.text, node.span.end)
            if m:
                self.error(
                    m.start(),
                    f"LaTeX Error: \\begin{{{node.name}}} on input line {begin_line} ended by \\end{{{m.group(1).strip()}}}.",
                    m.end(),
                )
            else:
                at = max(node.span.end - 1, node.span.start)
                self.error(at, f"LaTeX Error: \\begin{{{node.name}}} on input line {begin_line} ended by \\end{{document}}.")

    def _error_paths(self, kind: ErrorKind) -> list[tuple[AstNode, ...]]:
        out = []

        def walk(node: AstNode, path: tuple[AstNode, ...]) -> None:
            path = path + (node,)
            if node.error is kind:
                out.append(path)
            for c in node.children:
                walk(c, path)

        walk(self.ast.root, ())
        return out

    # -- references -----------------------------------------------------
    def bib_keys(self) -> set[str] | None:
        keys: set[str] = set()
        known = False
        for n in self.ast.nodes:
            if n.kind is NodeKind.COMMAND and n.name == "bibitem":
                known = True
                mand = [a for a in n.args if a.arg == "m"]
                if mand:
                    keys.add(mand[-1].inner_text().strip())
        external = [n for n in self.ast.nodes if n.kind is NodeKind.COMMAND and n.name in ("bibliography", "addbibresource")]
        for n in external:
            mand = [a for a in n.args if a.arg == "m"]
            if not mand:
                continue
            base = Path(self.doc.path).parent if not self.doc.path.startswith("<") else None
            for item in mand[-1].inner_text().split(","):
                item = item.strip()
                if not item:
                    continue
                f = Path(item if item.endswith(".bib") else item + ".bib")
                if base is None:
                    return None
                try:
                    content = (base / f).read_text(encoding="utf-8", errors="replace")
                except OSError:
                    return None
                keys.update(k.strip() for k in re.findall(r"@\w+\s*[{(]\s*([^,\s]+)\s*,", content))
                known = True
        return keys if known else (set() if self._cites() else None)

    def _cites(self) -> list[AstNode]:
        return [n for n in self.ast.nodes if n.kind is NodeKind.CITE_REF and n.macro != "nocite"]

    def check_references(self) -> None:
        keys = self.bib_keys()
        if keys is not None:
            for n in self._cites():
                for key in n.keys:
                    if key not in keys and key != "*":
                        line = self.doc.line_of(n.span.start)
                        self.warning(n.span.start, f"LaTeX Warning: Citation `{key}' on page 1 undefined on input line {line}.")
        labels = {k for n in self.ast.nodes if n.kind is NodeKind.LABEL_REF and n.macro == "label" for k in n.keys}
        for n in self.ast.nodes:
            if n.kind is NodeKind.LABEL_REF and n.macro != "label":
                for key in n.keys:
                    if key not in labels:
                        line = self.doc.line_of(n.span.start)
                        self.warning(n.span.start, f"LaTeX Warning: Reference `{key}' on page 1 undefined on input line {line}.")

    # -- encoding -------------------------------------------------------
    def check_encoding(self) -> None:
        if self.active & {"fontspec", "unicode-math", "xeCJK", "luatexja", "CJKutf8"}:
            return
        enc_opts = [p.options for p in self.ast.packages if p.name == "inputenc"]
        if any(o and "utf8" not in o for o in enc_opts):
            return
        fontencs: list[str] = []
        for p in self.ast.packages:
            if p.name == "fontenc":
                opts = [o.strip() for o in (p.options or "OT1").split(",") if o.strip()]
                for o in opts:
                    if o not in KNOWN_ENCODINGS:
                        self.error(
                            p.span.start,
                            f"Package fontenc Error: Encoding file `{o.lower()}enc.def' not found.",
                            p.span.end,
                            extra="(fontenc)                You might have misspelt the name of the encoding.",
                        )
                fontencs.extend(opts)
        t1 = "T1" in fontencs
        skip = self._opaque_ranges()
        for i, ch in enumerate(self.text):
            if ord(ch) < 128 or self._in_ranges(i, skip):
                continue
            if 0xDC80 <= ord(ch) <= 0xDCFF:
                self.error(i, f"Package inputenc Error: Invalid UTF-8 byte \"{ord(ch) - 0xDC00:02X}.", i + 1)
            elif ch in T1_ONLY:
                if not t1:
                    self.error(i, f"LaTeX Error: Command \\{T1_ONLY[ch]} unavailable in encoding OT1.", i + 1)
            elif not self.char_supported(ch):
                self.error(
                    i,
                    f"Package inputenc Error: Unicode character {ch} (U+{ord(ch):04X})",
                    i + 1,
                    extra="(inputenc)                not set up for use with LaTeX.",
                )

    @staticmethod
    def char_supported(ch: str) -> bool:
        code = ord(ch)
        if 0xA0 <= code <= 0x17F or ch in EXTRA_SUPPORTED:
            return True
        return unicodedata.category(ch) in ("Zs",) and code in (0x2002, 0x2003, 0x2009)

    def _opaque_ranges(self) -> list[tuple[int, int]]:
        out = []
        for n in self.ast.nodes:
            if n.kind is NodeKind.COMMENT:
                out.append((n.span.start, n.span.end))
            elif n.kind is NodeKind.ENVIRONMENT and n.name in ("verbatim", "verbatim*", "comment"):
                out.append((n.span.start, n.span.end))
        return out

    @staticmethod
    def _in_ranges(i: int, ranges: list[tuple[int, int]]) -> bool:
        return any(a <= i < b for a, b in ranges)

    # -- packages -------------------------------------------------------
    def check_packages(self) -> None:
        seen: dict[str, str | None] = {}
        for use in self.ast.packages:
            if use.name in seen and (seen[use.name] or "") != (use.options or "") and use.options:
                self.error(use.span.start, f"LaTeX Error: Option clash for package {use.name}.", use.span.end)
            seen.setdefault(use.name, use.options)
        first: dict[str, int] = {}
        for use in self.ast.packages:
            first.setdefault(use.name, use.span.start)
        for rule in self.db.conflicts_in(self.loaded):
            later, other = (rule.a, rule.b) if first[rule.a] > first[rule.b] else (rule.b, rule.a)
            at = first[later]
            if rule.kind is ConflictKind.ORDER_SENSITIVE:
                msg = f"Package {later} Error: {rule.b} must be loaded after {rule.a}."
            else:
                msg = f"Package {later} Error: Package {other} is incompatible with {later}."
            line_end = self.doc.line_bounds(self.doc.line_of(at))[1]
            self.error(at, msg, line_end)


def static_log(ast: Ast, db: PackageDb) -> str:
    """The pdfTeX-format log the static checks produce for ``ast``."""
    return _Checker(ast, db).run()


def static_report(doc: SourceDocument | Ast, db: PackageDb) -> LogReport:
    ast = doc if isinstance(doc, Ast) else parse(doc)
    return parse_log(static_log(ast, db), max_line=0)
