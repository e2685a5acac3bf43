"""Regenerate src/texdoctor/data/packages.json from the compact tables below."""

import json
from pathlib import Path

KERNEL_COMMANDS = """
documentclass usepackage RequirePackage begin end par relax def gdef edef xdef let futurelet
newcommand renewcommand providecommand newenvironment renewenvironment newtheorem newcounter
setcounter addtocounter stepcounter refstepcounter value arabic roman Roman alph Alph fnsymbol
newlength setlength addtolength settowidth settoheight settodepth newif ifx ifnum ifdim fi else or
expandafter noexpand csname endcsname string the number romannumeral makeatletter makeatother
input include includeonly InputIfFileExists IfFileExists AtBeginDocument AtEndDocument
title author date thanks maketitle and today abstractname
part chapter section subsection subsubsection paragraph subparagraph appendix
tableofcontents listoffigures listoftables contentsline addcontentsline addtocontents
label ref pageref cite nocite bibitem bibliography bibliographystyle newblock
footnote footnotemark footnotetext marginpar
emph textbf textit textsl textsc texttt textrm textsf textup textmd textnormal
bfseries itshape slshape scshape ttfamily rmfamily sffamily upshape mdseries normalfont
bf it sl sc tt rm sf em
tiny scriptsize footnotesize small normalsize large Large LARGE huge Huge
centering raggedright raggedleft noindent indent newline linebreak nolinebreak
newpage clearpage cleardoublepage pagebreak nopagebreak samepage
hspace vspace hfill vfill hskip vskip smallskip medskip bigskip quad qquad enspace enskip
thinspace negthinspace kern mbox makebox fbox framebox parbox raisebox rule strut
sbox savebox usebox newsavebox phantom hphantom vphantom smash
item caption centerline hline cline vline multicolumn tabularnewline arraystretch
arraycolsep tabcolsep extracolsep
textwidth linewidth textheight columnwidth paperwidth paperheight parindent parskip
baselineskip baselinestretch topmargin oddsidemargin evensidemargin headheight headsep footskip
pagestyle thispagestyle pagenumbering markboth markright
ldots dots cdots vdots ddots LaTeX TeX LaTeXe
textbackslash textasciitilde textasciicircum textbar textless textgreater textbullet
textendash textemdash textquoteleft textquoteright textquotedblleft textquotedblright
textperiodcentered textregistered texttrademark textcopyright textdegree textsection
textparagraph textdagger textdaggerdbl textunderscore textdollar textsterling
dag ddag S P copyright pounds oe OE ae AE aa AA o O l L ss i j
frac sqrt sum prod int oint lim sup inf max min log ln exp sin cos tan sec csc cot
arcsin arccos arctan sinh cosh tanh det dim ker deg arg gcd hom Pr
alpha beta gamma delta epsilon varepsilon zeta eta theta vartheta iota kappa lambda mu nu xi
pi varpi rho varrho sigma varsigma tau upsilon phi varphi chi psi omega
Gamma Delta Theta Lambda Xi Pi Sigma Upsilon Phi Psi Omega
leq geq neq le ge ne ll gg approx equiv sim simeq cong propto pm mp times div cdot ast star
circ bullet oplus otimes odot in notin ni subset supset subseteq supseteq cup cap setminus
emptyset forall exists neg lnot land lor wedge vee infty partial nabla prime
rightarrow leftarrow Rightarrow Leftarrow leftrightarrow Leftrightarrow to gets mapsto
longrightarrow longleftarrow Longrightarrow Longleftarrow iff implies uparrow downarrow
hat bar vec tilde dot ddot check breve acute grave widehat widetilde overline underline
overbrace underbrace mathrm mathbf mathit mathsf mathtt mathcal mathnormal displaystyle
textstyle scriptstyle scriptscriptstyle left right middle big Big bigg Bigg bigl bigr Bigl Bigr
langle rangle lfloor rfloor lceil rceil lbrace rbrace vert Vert mid parallel perp
aleph hbar ell wp Re Im angle triangle backslash surd top bot
stackrel overset underset choose atop over limits nolimits operatorname
ensuremath mathchoice hbox vbox vtop hrule vrule
protect verb url string noexpand
newfont selectfont fontsize fontfamily fontseries fontshape fontencoding usefont
color
listfiles nofiles
onecolumn twocolumn
includegraphics
sloppy fussy hyphenation hyphenpenalty tolerance
advance multiply divide global long outer let chardef mathchardef countdef dimendef skipdef toksdef
count dimen skip toks box copy setbox wd ht dp lastbox unhbox unvbox unhcopy unvcopy
hrulefill dotfill leaders cleaders xleaders penalty break nobreak allowbreak goodbreak filbreak
ignorespaces unskip unpenalty unkern lastskip lastpenalty leavevmode
endgraf endline space nobreakspace obeylines obeyspaces frenchspacing nonfrenchspacing
begingroup endgroup bgroup egroup aftergroup afterassignment
message typeout immediate write openout closeout openin closein read newwrite newread
errmessage PackageError PackageWarning PackageInfo ClassError ClassWarning GenericError GenericWarning
DeclareOption ProcessOptions ExecuteOptions PassOptionsToPackage PassOptionsToClass ProvidesPackage
ProvidesFile ProvidesClass NeedsTeXFormat LoadClass LoadClassWithOptions
DeclareRobustCommand DeclareTextCommand DeclareTextSymbol DeclareFontEncoding DeclareFontFamily
DeclareFontShape DeclareSymbolFont DeclareMathSymbol DeclareMathAlphabet SetSymbolFont
newcount newdimen newskip newtoks newbox newsavebox newfam newlanguage newmuskip
ifcase ifdefined ifcsname ifmmode ifvmode ifhmode ifinner iftrue iffalse ifodd ifeof ifcat ifvoid
ifhbox ifvbox loop repeat
jobname inputlineno meaning show showthe showbox detokenize unexpanded scantokens numexpr dimexpr
glueexpr protected
halign valign noalign omit span cr crcr tabskip
displaylimits mathop mathbin mathrel mathopen mathclose mathpunct mathord mathinner
mathaccent radical delimiter mathchar char accent
not perp
leftarrowfill rightarrowfill
cal mit oldstylenums
thepage thesection thesubsection thefigure thetable theequation thefootnote
theenumi theenumii labelenumi labelitemi
footnoterule footnotesep
listparindent labelsep labelwidth leftmargin rightmargin itemsep topsep partopsep itemindent
parsep
unitlength put line vector circle oval qbezier multiput framebox dashbox
addvspace addpenalty nointerlineskip offinterlineskip
cleardoublepage enlargethispage suppressfloats
floatsep textfloatsep intextsep dblfloatsep topfraction bottomfraction textfraction floatpagefraction
abovedisplayskip belowdisplayskip abovedisplayshortskip belowdisplayshortskip
jot mathsurround
fboxsep fboxrule
lq rq slash textvisiblespace textcompwordmark
em ensuremath
emergencystretch hbadness vbadness hfuzz vfuzz
pretolerance
nolinebreak
footnotesize
"""

KERNEL_ENVIRONMENTS = """
center lrbox sloppypar
document itemize enumerate description figure figure* table table* tabular tabular* center
flushleft flushright quote quotation verse verbatim verbatim* minipage equation eqnarray eqnarray*
array thebibliography abstract titlepage list trivlist picture math displaymath tabbing
theindex lrbox filecontents filecontents*
"""

PACKAGES = [
    dict(name="amsmath", priority=10, notes="AMS mathematical facilities",
         commands="text intertext dfrac tfrac binom dbinom tbinom eqref tag notag nonumber boxed "
                  "DeclareMathOperator operatorname xrightarrow xleftarrow overset underset "
                  "substack numberwithin allowdisplaybreaks cfrac iint iiint idotsint lvert rvert lVert rVert "
                  "dotsc dotsb dotsm dotsi",
         envs="align align* gather gather* multline multline* flalign flalign* alignat alignat* "
              "aligned gathered alignedat split cases matrix pmatrix bmatrix Bmatrix vmatrix Vmatrix "
              "smallmatrix subequations equation*"),
    dict(name="amssymb", priority=10, notes="AMS symbol fonts",
         commands="mathbb mathfrak varnothing leqslant geqslant lesssim gtrsim therefore because "
                  "square blacksquare lozenge checkmark nexists complement varkappa digamma "
                  "triangleq coloneqq subsetneq supsetneq nleq ngeq mathbb"),
    dict(name="amsthm", priority=8, notes="Theorem environments",
         commands="theoremstyle qedhere qedsymbol newtheoremstyle",
         envs="proof"),
    dict(name="booktabs", priority=10, notes="Publication quality tables",
         commands="toprule midrule bottomrule cmidrule addlinespace specialrule morecmidrules"),
    dict(name="graphicx", priority=10, notes="Enhanced graphics support",
         commands="includegraphics graphicspath scalebox resizebox rotatebox reflectbox DeclareGraphicsExtensions"),
    dict(name="algorithm2e", priority=10, default_options="ruled,vlined",
         notes="Floating algorithm environment with pseudocode keywords",
         commands="KwIn KwOut KwData KwResult Return KwRet SetAlgoLined SetKwInOut SetKwFunction "
                  "SetKwProg DontPrintSemicolon If ElseIf Else For ForEach While Repeat eIf uIf "
                  "SetAlgoNoLine LinesNumbered caption listofalgorithms SetKw Begin tcp",
         envs="algorithm algorithm* procedure function"),
    dict(name="algorithm", priority=5, notes="Algorithm float wrapper from the algorithms bundle",
         commands="listofalgorithms floatname", envs="algorithm"),
    dict(name="algorithmic", priority=4, notes="algorithmic pseudocode (algorithms bundle)",
         commands="STATE IF ELSIF ELSE ENDIF FOR ENDFOR WHILE ENDWHILE REQUIRE ENSURE RETURN",
         envs="algorithmic"),
    dict(name="algorithmicx", priority=6, notes="algorithmicx base layer",
         commands="algdef algrenewcommand algnewcommand algtext", envs="algorithmic"),
    dict(name="algpseudocode", priority=7, notes="algorithmicx pseudocode layout",
         commands="State If ElsIf Else EndIf For ForAll EndFor While EndWhile Require Ensure "
                  "Procedure EndProcedure Function EndFunction Call Comment Statex",
         envs="algorithmic", loads="algorithmicx"),
    dict(name="hyperref", priority=10, notes="Hypertext links",
         commands="href url nolinkurl hypersetup autoref hyperref hypertarget hyperlink phantomsection "
                  "texorpdfstring pdfbookmark nameref"),
    dict(name="cleveref", priority=9, notes="Clever cross references",
         commands="cref Cref crefrange Crefrange crefname Crefname cpageref labelcref"),
    dict(name="inputenc", priority=10, default_options="utf8", notes="Input encoding selection",
         commands="inputencoding DeclareUnicodeCharacter"),
    dict(name="fontenc", priority=10, default_options="T1", notes="Font encoding selection",
         commands="th TH dh DH ng NG guillemotleft guillemotright quotedblbase"),
    dict(name="babel", priority=9, default_options="english", notes="Multilingual support",
         commands="selectlanguage foreignlanguage otherlanguage", envs="otherlanguage otherlanguage*"),
    dict(name="geometry", priority=10, notes="Page layout", commands="geometry newgeometry restoregeometry"),
    dict(name="xcolor", priority=10, notes="Colour extensions",
         commands="color textcolor colorbox fcolorbox definecolor pagecolor colorlet"),
    dict(name="tikz", priority=10, notes="Graphics with PGF/TikZ",
         commands="tikz usetikzlibrary draw node path fill filldraw coordinate foreach tikzset shade clip",
         envs="tikzpicture scope", loads="xcolor graphicx"),
    dict(name="listings", priority=10, notes="Typeset source code",
         commands="lstset lstinline lstinputlisting lstdefinelanguage lstdefinestyle lstlistoflistings",
         envs="lstlisting"),
    dict(name="caption", priority=8, notes="Customise captions",
         commands="captionsetup captionof DeclareCaptionFormat DeclareCaptionLabelFormat"),
    dict(name="subcaption", priority=9, notes="Sub-captions for sub-figures",
         commands="subcaption subcaptionbox subref", envs="subfigure subtable", loads="caption"),
    dict(name="subfigure", priority=2, notes="Deprecated sub-figures package",
         commands="subfigure subtable"),
    dict(name="natbib", priority=9, notes="Author-year citations",
         commands="citep citet citealp citealt citeauthor citeyear citenum setcitestyle bibpunct Citep Citet"),
    dict(name="biblatex", priority=8, notes="Bibliographies in LaTeX using BibTeX/biber",
         commands="addbibresource printbibliography parencite textcite autocite footcite fullcite "
                  "supercite Cite Parencite Textcite ExecuteBibliographyOptions"),
    dict(name="cite", priority=6, notes="Compressed numerical citations", commands="citen citenum"),
    dict(name="url", priority=7, notes="Verbatim URLs", commands="url urlstyle path"),
    dict(name="enumitem", priority=9, notes="Customise list environments",
         commands="setlist newlist setlistdepth"),
    dict(name="multirow", priority=9, notes="Cells spanning rows", commands="multirow"),
    dict(name="siunitx", priority=9, notes="SI units",
         commands="SI si num ang qty unit sisetup DeclareSIUnit tablenum"),
    dict(name="float", priority=8, notes="Improved floats and the H placement",
         commands="floatstyle newfloat floatname restylefloat listof"),
    dict(name="fontspec", priority=8, notes="Fonts for XeLaTeX/LuaLaTeX",
         commands="setmainfont setsansfont setmonofont fontspec newfontfamily"),
    dict(name="textcomp", priority=5, notes="Text companion symbols",
         commands="texteuro textmu textohm textcelsius textonehalf"),
    dict(name="xspace", priority=5, notes="Smart spacing after macros", commands="xspace"),
    dict(name="array", priority=7, notes="Extended array and tabular", commands="newcolumntype firsthline lasthline"),
    dict(name="tabularx", priority=7, notes="Tables with adjustable-width columns",
         commands="tabularxcolumn", envs="tabularx", loads="array"),
    dict(name="longtable", priority=7, notes="Tables across pages",
         commands="endhead endfirsthead endfoot endlastfoot", envs="longtable"),
    dict(name="wrapfig", priority=6, notes="Wrapped figures", envs="wrapfigure wraptable"),
    dict(name="amsfonts", priority=6, notes="AMS fonts", commands="mathbb mathfrak"),
    dict(name="mathtools", priority=7, notes="amsmath extensions",
         commands="coloneqq mathclap DeclarePairedDelimiter prescript", loads="amsmath",
         envs="dcases dcases* multlined"),
    dict(name="bm", priority=6, notes="Bold math symbols", commands="bm"),
    dict(name="microtype", priority=6, notes="Micro-typography", commands="microtypesetup"),
]

CONFLICTS = [
    dict(a="hyperref", b="cleveref", kind="OrderSensitive", a_before_b=True,
         resolution_hint="load cleveref after hyperref"),
    dict(a="natbib", b="biblatex", kind="Incompatible",
         resolution_hint="remove natbib; biblatex provides its own citation commands"),
    dict(a="algorithm2e", b="algorithm", kind="Incompatible",
         resolution_hint="remove algorithm; algorithm2e defines its own algorithm float"),
    dict(a="algorithm2e", b="algorithmic", kind="Incompatible",
         resolution_hint="remove algorithmic; use algorithm2e keywords instead"),
    dict(a="subfigure", b="subcaption", kind="Incompatible",
         resolution_hint="remove subfigure; it is superseded by subcaption"),
    dict(a="amsmath", b="amsthm", kind="OrderSensitive", a_before_b=True,
         resolution_hint="load amsthm after amsmath"),
    dict(a="biblatex", b="cite", kind="Incompatible",
         resolution_hint="remove cite; biblatex handles citation compression"),
    dict(a="natbib", b="cite", kind="Incompatible",
         resolution_hint="remove cite; natbib provides sort&compress"),
    dict(a="inputenc", b="fontspec", kind="Incompatible",
         resolution_hint="remove inputenc; fontspec engines read UTF-8 natively"),
]


def words(s):
    return sorted(set(s.split()))


def build():
    packages = [dict(
        name="latex", priority=0, builtin=True, default_options=None,
        notes="The LaTeX format and standard classes (always loaded)",
        provides_commands=words(KERNEL_COMMANDS), provides_environments=words(KERNEL_ENVIRONMENTS),
    )]
    for p in PACKAGES:
        rec = dict(
            name=p["name"], priority=p["priority"],
            provides_commands=words(p.get("commands", "")),
            provides_environments=words(p.get("envs", "")),
            default_options=p.get("default_options"), notes=p["notes"],
        )
        if "loads" in p:
            rec["loads"] = words(p["loads"])
        packages.append(rec)
    conflicts = [dict(c, a_before_b=c.get("a_before_b", False)) for c in CONFLICTS]
    return {"version": 1, "packages": packages, "conflicts": conflicts}


if __name__ == "__main__":
    out = Path(__file__).resolve().parents[1] / "src/texdoctor/data/packages.json"
    out.write_text(json.dumps(build(), indent=1) + "\n")
    print(out)
