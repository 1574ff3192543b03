"""Command-line interface: tables, Brun runs, verification, series and charts."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .arith import AbelianGroup, as_prime
from .brun import ExtensionRecord, run_brun
from .catalog import MODELS, cooperations, rational_thh, thc_bpn_fp, thc_z, thh_bpn_fp
from .graded import GradedModule, Presentation
from .verify import DEFAULT_D, all_flags, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

MODEL_NAMES = sorted(MODELS) + ["thc-z"]
SERIES = {
    "thh-fp": lambda a: thh_bpn_fp(a.n, a.prime),
    "thc-fp": lambda a: thc_bpn_fp(a.n, a.prime),
    "rational": lambda a: rational_thh(a.n, a.m, a.prime),
    "cooperations": lambda a: cooperations(a.n, a.m, a.prime),
}


def table(model: str, p: int, D: int) -> List[AbelianGroup]:
    if model == "thc-z":
        return [thc_z(d).localize(p) for d in range(D + 1)]
    return MODELS[model](p).realize_range(D)


def records(groups: Sequence[AbelianGroup]) -> List[dict]:
    return [g.to_record(d) for d, g in enumerate(groups)]


def to_csv(rows: List[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["degree", "free_rank", "torsion_exponents"])
    for r in rows:
        w.writerow([r["degree"], r["free_rank"], ";".join(map(str, r["torsion_exponents"]))])
    return buf.getvalue()


def from_csv(text: str) -> List[AbelianGroup]:
    rows = list(csv.DictReader(io.StringIO(text)))
    return [
        AbelianGroup(int(r["free_rank"]), tuple(int(e) for e in r["torsion_exponents"].split(";") if e)) for r in rows
    ]


def dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- chart -------------------------------------------------------------------


@dataclass
class Dot:
    degree: int
    index: int
    label: str
    exponent: int  # 0 = free


@dataclass
class ChartDocument:
    p: int
    max_degree: int
    dots: List[Dot] = field(default_factory=list)
    struts: List[Tuple[int, int]] = field(default_factory=list)
    extensions: List[Tuple[int, int, str]] = field(default_factory=list)

    def column(self, d: int) -> List[int]:
        return [k for k, dot in enumerate(self.dots) if dot.degree == d]


def build_chart(model, p: int, D: int, log: Sequence[ExtensionRecord] = ()) -> ChartDocument:
    """Chart of a named model or of a module object."""
    doc = ChartDocument(p, D)
    if isinstance(model, GradedModule):
        pres: Optional[GradedModule] = model
    else:
        pres = None if model == "thc-z" else MODELS[model](p)
    labelled: Dict[Tuple[int, str], int] = {}
    columns: List[List[Tuple[object, int]]] = []
    for d in range(D + 1):
        if isinstance(pres, Presentation):
            col = [(m, e) for m, e in pres.summands(d)]
        else:
            g = thc_z(d).localize(p) if pres is None else pres.realize_degree(d)
            col = [(None, 0)] * g.free_rank + [(None, e) for e in g.torsion]
        columns.append(col)
        for i, (m, e) in enumerate(col):
            labelled[(d, str(m))] = len(doc.dots)
            doc.dots.append(Dot(d, i, "" if m is None else str(m), e))
    if isinstance(pres, Presentation) and not pres.v1_trivial:
        v = 2 * p - 2
        for k, dot in enumerate(doc.dots):
            m = columns[dot.degree][dot.index][0]
            target = labelled.get((dot.degree + v, str(m.times_v1(1))))
            if target is not None:
                doc.struts.append((k, target))
    for r in log:
        col = doc.column(r.degree)
        if col:
            doc.extensions.append((col[0], col[min(1, len(col) - 1)], f"{r.source} -> {r.target}"))
    return doc


def render_svg(doc: ChartDocument) -> str:
    step, pad = 16, 30
    height = max([dot.index for dot in doc.dots], default=0) * step + 2 * pad + step
    width = (doc.max_degree + 1) * step + 2 * pad
    y0 = height - pad

    def xy(k: int) -> Tuple[int, int]:
        dot = doc.dots[k]
        return pad + dot.degree * step, y0 - dot.index * step

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<line class="axis" x1="{pad}" y1="{y0 + 8}" x2="{width - pad}" y2="{y0 + 8}" stroke="black"/>',
    ]
    for d in range(0, doc.max_degree + 1, 2):
        out.append(f'<text x="{pad + d * step}" y="{y0 + 22}" font-size="8" text-anchor="middle">{d}</text>')
    for a, b in doc.struts:
        (x1, y1), (x2, y2) = xy(a), xy(b)
        out.append(f'<line class="strut" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="gray"/>')
    for a, b, label in doc.extensions:
        (x1, y1), (x2, y2) = xy(a), xy(b)
        out.append(
            f'<path class="extension" d="M {x1} {y1} C {x1 - 10} {y1} {x2 - 10} {y2 - 10} {x2} {y2 - 4}" '
            f'fill="none" stroke="red" stroke-dasharray="3,2"><title>{label}</title></path>'
        )
    for k, dot in enumerate(doc.dots):
        x, y = xy(k)
        fill = "black" if dot.exponent == 0 else "white"
        out.append(
            f'<circle class="dot" cx="{x}" cy="{y}" r="3" fill="{fill}" stroke="black" '
            f'data-degree="{dot.degree}" data-exponent="{dot.exponent}"><title>{dot.label}</title></circle>'
        )
        if dot.exponent > 1:
            out.append(f'<text x="{x + 4}" y="{y - 3}" font-size="6">{dot.exponent}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# -- commands ----------------------------------------------------------------


def cmd_compute(a) -> Tuple[str, int]:
    rows = records(table(a.model, a.prime, a.max_degree))
    return (dump(rows) if a.format == "json" else to_csv(rows)), EXIT_OK


def cmd_brun(a) -> Tuple[str, int]:
    run = run_brun(a.n, a.prime, a.max_degree)
    rows = records([run.abutment_degree(d) for d in range(a.max_degree + 1)])
    log = [r.to_record() for r in run.extension_log]
    fmt = a.emit or a.format
    if fmt == "json":
        doc = {"n": a.n, "p": a.prime, "max_degree": a.max_degree, "degrees": rows}
        if a.log_extensions:
            doc["extensions"] = log
        return dump(doc), EXIT_OK
    if a.log_extensions:
        for r in log:
            print(f"extension d={r['degree']}: p^{r['p_power']} * {r['source']} = {r['target']}", file=sys.stderr)
    return to_csv(rows), EXIT_OK


def cmd_verify(a) -> Tuple[str, int]:
    reports = run_suite(a.suite, a.prime, a.max_degree)
    for r in reports:
        print(r.summary(), file=sys.stderr)
    ok = all(r.ok for r in reports)
    doc = {
        "suite": a.suite,
        "p": a.prime,
        "status": "pass" if ok else "fail",
        "flags": all_flags(reports),
        "reports": [r.to_dict() for r in reports],
    }
    return dump(doc), EXIT_OK if ok else EXIT_FAIL


def cmd_series(a) -> Tuple[str, int]:
    s = SERIES[a.kind](a)
    coeffs = s.coefficients(a.max_degree)
    if a.format == "json":
        return dump([{"degree": d, "dim": c} for d, c in enumerate(coeffs)]), EXIT_OK
    return "degree,dim\n" + "".join(f"{d},{c}\n" for d, c in enumerate(coeffs)), EXIT_OK


def cmd_chart(a) -> Tuple[str, int]:
    log = run_brun(2, a.prime, a.max_degree).extension_log if a.model == "thh-bp2-bp1" else ()
    return render_svg(build_chart(a.model, a.prime, a.max_degree, log)), EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prime", type=int, default=2)
    common.add_argument("--max-degree", type=int, default=None)
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--output", default=None, help="write to this file instead of stdout")

    parser = argparse.ArgumentParser(prog="bpthh", description="Exact THH module calculator.")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", parents=[common], help="degreewise groups of a model")
    c.add_argument("--model", choices=MODEL_NAMES, required=True)
    c.set_defaults(func=cmd_compute, default_degree=40)

    b = sub.add_parser("brun", parents=[common], help="run the Brun spectral sequence")
    b.add_argument("--n", type=int, choices=[0, 1, 2], default=2)
    b.add_argument("--emit", choices=["json", "csv"], default=None)
    b.add_argument("--log-extensions", action="store_true")
    b.set_defaults(func=cmd_brun, default_degree=60)

    v = sub.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("--suite", choices=sorted(DEFAULT_D) + ["all"], default="main")
    v.set_defaults(func=cmd_verify, default_degree=None)

    s = sub.add_parser("series", parents=[common], help="dimension series coefficients")
    s.add_argument("--kind", choices=sorted(SERIES), default="thh-fp")
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--m", type=int, default=0)
    s.set_defaults(func=cmd_series, default_degree=40)

    ch = sub.add_parser("chart", parents=[common], help="SVG chart of a model")
    ch.add_argument("--model", choices=MODEL_NAMES, required=True)
    ch.set_defaults(func=cmd_chart, default_degree=40)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    if a.max_degree is None:
        a.max_degree = a.default_degree
    try:
        a.prime = int(as_prime(a.prime))
        if a.max_degree is not None and a.max_degree < 0:
            raise ValueError("--max-degree must be nonnegative")
        text, code = a.func(a)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if a.output:
            with open(a.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
