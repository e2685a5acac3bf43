"""Generate the synthetic seed corpus shipped in src/texdoctor/data/seeds.

Every seed is a small single-file article exercising the material the bench
injects into: commands, inline and display math, package-provided symbols,
tables, cross references, citations and (sometimes) a font encoding.

    python tools/make_seeds.py [--count 60] [--out src/texdoctor/data/seeds]
"""

from __future__ import annotations

import argparse
import random
from pathlib import Path

WORDS = (
    "model data method result signal noise sample error bound estimate graph network layer "
    "kernel matrix vector gradient loss training test corpus document parser token span tree "
    "node edge cluster metric baseline system approach analysis experiment setting value"
).split()
VERBS = "improves reduces captures explains predicts bounds controls dominates matches extends".split()
ADJ = "robust simple sparse linear stable novel efficient compact general accurate".split()

INLINE_MATH = [
    r"$x_i + y_i$",
    r"$\alpha \leq \beta$",
    r"$f(x) = x^2 + 1$",
    r"$\sum_{i=1}^{n} w_i$",
    r"$O(n \log n)$",
    r"$\lambda > 0$",
    r"$\theta^\top x$",
    r"$\|v\|_2 \leq 1$",
    r"$p(y \mid x)$",
    r"$k = 3$",
]

TITLES = "Introduction Background Method Analysis Experiments Results Discussion Conclusion".split()
AUTHORS = ["A. Smith", "B. Jones", "C. Lee", "D. Garcia", "E. Kim", "F. Novak", "G. Rossi", "H. Tanaka"]
BIB_KEYS = ["smith2019", "jones2020", "lee2018", "garcia2021", "kim2017", "novak2022", "rossi2016", "tanaka2023"]


class Seed:
    def __init__(self, rng: random.Random, index: int) -> None:
        self.rng = rng
        self.index = index
        self.packages: list[str] = ["\\usepackage{amsmath}"]
        self.body: list[str] = []
        self.labels: list[str] = []
        self.cites: list[str] = []
        r = rng.random
        self.use_booktabs = r() < 0.6
        self.use_graphicx = r() < 0.5
        self.use_xcolor = r() < 0.4
        self.use_hyperref = r() < 0.4
        self.use_amssymb = r() < 0.5
        self.use_algorithm = r() < 0.3
        self.use_natbib = r() < 0.4
        self.use_fontenc = r() < 0.4
        self.use_macros = r() < 0.6
        self.keys = rng.sample(BIB_KEYS, rng.randint(3, 5))

    # -- text ------------------------------------------------------------
    def sentence(self, math: bool = False, cite: bool = False) -> str:
        rng = self.rng
        subject = f"The {rng.choice(ADJ)} {rng.choice(WORDS)}"
        words = [subject, rng.choice(VERBS), "the", rng.choice(WORDS)]
        if math:
            words += ["when", rng.choice(INLINE_MATH)]
        else:
            words += ["of", "each", rng.choice(WORDS)]
        if cite:
            key = rng.choice(self.keys)
            self.cites.append(key)
            cmd = rng.choice(["citep", "citet"]) if self.use_natbib else "cite"
            words.append(f"\\{cmd}{{{key}}}")
        text = " ".join(words) + "."
        if rng.random() < 0.3:
            cmd = rng.choice(["textbf", "emph", "textit"])
            w = rng.choice(WORDS)
            text = text.replace(f" {w} ", f" \\{cmd}{{{w}}} ", 1) if f" {w} " in text else text
        return text

    def paragraph(self) -> list[str]:
        rng = self.rng
        n = rng.randint(2, 4)
        out = [self.sentence(math=rng.random() < 0.5, cite=rng.random() < 0.3) for _ in range(n)]
        extra = []
        if self.use_xcolor and rng.random() < 0.3:
            extra.append(f"This \\textcolor{{blue}}{{{rng.choice(WORDS)}}} is highlighted.")
        if self.use_hyperref and rng.random() < 0.3:
            extra.append("Code is available at \\url{https://example.org/code}.")
        if self.use_macros and rng.random() < 0.4:
            extra.append(f"We evaluate on \\dataset{{}} with $\\vect{{x}} \\in {self.reals()}^d$.")
        return out + extra

    def reals(self) -> str:
        return "\\mathbb{R}" if self.use_amssymb else "R"

    # -- blocks ------------------------------------------------------------
    def table(self, n: int) -> list[str]:
        rng = self.rng
        cols = rng.randint(2, 4)
        spec = "l" + "".join(rng.choice("cr") for _ in range(cols - 1))
        label = f"tab:t{n}"
        self.labels.append(label)
        head = " & ".join(["Name"] + [rng.choice(WORDS).capitalize() for _ in range(cols - 1)]) + " \\\\"
        rows = []
        for _ in range(rng.randint(2, 4)):
            cells = [rng.choice(WORDS)] + [f"{rng.randint(1, 99)}.{rng.randint(0, 9)}" for _ in range(cols - 1)]
            rows.append(" & ".join(cells) + " \\\\")
        top, mid, bot = ("\\toprule", "\\midrule", "\\bottomrule") if self.use_booktabs else ("\\hline", "\\hline", "\\hline")
        return [
            "\\begin{table}[t]",
            "\\centering",
            f"\\begin{{tabular}}{{{spec}}}",
            top,
            head,
            mid,
            *rows,
            bot,
            "\\end{tabular}",
            f"\\caption{{Comparison of {rng.choice(WORDS)} values.}}",
            f"\\label{{{label}}}",
            "\\end{table}",
        ]

    def figure(self, n: int) -> list[str]:
        label = f"fig:f{n}"
        self.labels.append(label)
        return [
            "\\begin{figure}[htbp]",
            "\\centering",
            "\\includegraphics[width=0.5\\linewidth]{example-image-a}",
            f"\\caption{{Overview of the {self.rng.choice(WORDS)}.}}",
            f"\\label{{{label}}}",
            "\\end{figure}",
        ]

    def align(self, n: int) -> list[str]:
        label = f"eq:e{n}"
        self.labels.append(label)
        env = self.rng.choice(["align", "equation"])
        if env == "align":
            lines = [f"  f(x) &= {self.rng.choice(['x^2', 'e^{x}', 'ax + b'])} \\\\", "  g(x) &= f(x) + 1"]
        else:
            rhs = self.rng.choice(["mc^2", "\\frac{1}{2} m v^2", "\\sum_{i} x_i"])
            lines = [f"  E = {rhs}"]
        return [f"\\begin{{{env}}}", *lines, f"\\label{{{label}}}", f"\\end{{{env}}}"]

    def items(self) -> list[str]:
        env = self.rng.choice(["itemize", "enumerate"])
        return [f"\\begin{{{env}}}", *(f"\\item {self.sentence()}" for _ in range(self.rng.randint(2, 4))), f"\\end{{{env}}}"]

    def algorithm(self) -> list[str]:
        return [
            "\\begin{algorithm}",
            "\\caption{Training procedure}",
            "\\KwIn{data $x$}",
            "\\KwOut{model $f$}",
            "\\Return $f(x)$",
            "\\end{algorithm}",
        ]

    # -- assembly ----------------------------------------------------------
    def build(self) -> str:
        rng = self.rng
        titles = rng.sample(TITLES, rng.randint(2, 4))
        blocks_pool = ["table", "figure" if self.use_graphicx else "items", "align", "items"]
        if self.use_algorithm:
            blocks_pool.append("algorithm")
        sections = []
        # one table per seed at least, so table-level injections always apply
        forced = ["table"]
        for i, title in enumerate(titles):
            sec = [f"\\section{{{title}}}", f"\\label{{sec:s{i}}}"]
            self.labels.append(f"sec:s{i}")
            sec += self.paragraph()
            kinds = forced + [rng.choice(blocks_pool)] if i == 0 else [rng.choice(blocks_pool)]
            forced = []
            for k, kind in enumerate(kinds):
                sec.append("")
                if kind == "table":
                    sec += self.table(i * 10 + k)
                elif kind == "figure":
                    sec += self.figure(i * 10 + k)
                elif kind == "align":
                    sec += self.align(i * 10 + k)
                elif kind == "items":
                    sec += self.items()
                elif kind == "algorithm":
                    sec += self.algorithm()
                    self.use_algorithm = "used"
            sec.append("")
            sec += self.paragraph()
            if self.labels and rng.random() < 0.8:
                target = rng.choice(self.labels)
                sec.append(f"As shown in \\ref{{{target}}}, the {rng.choice(WORDS)} {rng.choice(VERBS)} the {rng.choice(WORDS)}.")
            sections.append("\n".join(sec))
        if not self.cites:
            self.cites.append(self.keys[0])
            cmd = "citep" if self.use_natbib else "cite"
            sections[-1] += f"\nFurther details appear in \\{cmd}{{{self.keys[0]}}}."
        if self.use_algorithm is True:
            sections[-1] += "\n\n" + "\n".join(self.algorithm())
            self.use_algorithm = "used"

        pre = ["\\documentclass{article}"]
        if self.use_fontenc:
            pre.append("\\usepackage[T1]{fontenc}")
        pre += self.packages
        if self.use_amssymb:
            pre.append("\\usepackage{amssymb}")
        if self.use_booktabs:
            pre.append("\\usepackage{booktabs}")
        if self.use_graphicx:
            pre.append("\\usepackage{graphicx}")
        if self.use_xcolor:
            pre.append("\\usepackage{xcolor}")
        if self.use_algorithm:
            pre.append("\\usepackage[ruled,vlined]{algorithm2e}")
        if self.use_natbib:
            pre.append("\\usepackage{natbib}")
        if self.use_hyperref:
            pre.append("\\usepackage{hyperref}")
        if self.use_macros:
            pre.append("\\newcommand{\\vect}[1]{\\mathbf{#1}}")
            pre.append("\\newcommand{\\dataset}{\\textsc{Bench}}")
        bib = ["\\begin{thebibliography}{9}"]
        for key in self.keys:
            author = AUTHORS[BIB_KEYS.index(key)]
            bib.append(f"\\bibitem{{{key}}} {author}. A study of {rng.choice(WORDS)}s. 20{rng.randint(10, 23)}.")
        bib.append("\\end{thebibliography}")
        title = f"\\title{{On {rng.choice(ADJ).capitalize()} {rng.choice(WORDS).capitalize()}s}}"
        doc = [
            *pre,
            "",
            title,
            f"\\author{{{rng.choice(AUTHORS)}}}",
            "",
            "\\begin{document}",
            "\\maketitle",
            "",
            "\n\n".join(sections),
            "",
            *bib,
            "\\end{document}",
            "",
        ]
        return "\n".join(doc)


def generate(count: int, seed: int = 2024) -> dict[str, str]:
    out = {}
    for i in range(count):
        rng = random.Random(f"{seed}:{i}")
        out[f"seed{i:03d}.tex"] = Seed(rng, i).build()
    return out


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=60)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "src/texdoctor/data/seeds"))
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in generate(args.count, args.seed).items():
        (out / name).write_text(text, encoding="utf-8")
    print(f"wrote {args.count} seeds to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
