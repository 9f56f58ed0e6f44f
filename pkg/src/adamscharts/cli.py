"""Command-line surface: extract, validate, turn, diff, render, stats.

Exit codes form the scriptable contract: 0 for a clean run, 1 for a clean
run that found something (validation errors, a nonempty diff), 2 for
unusable input.  All output is deterministic, canonically sorted,
newline-terminated UTF-8.
"""

from __future__ import annotations

import argparse
import sys
from collections import Counter
from pathlib import Path
from typing import Optional, Sequence

from . import chartir
from .extract import extract_document
from .model import ChartError, ChartPage, restrict
from .pageengine import compare, order_token, summand_tokens, turn_page
from .render import StyleProfile, render
from .validator import ctau_check, validate_structure


def _read_chart(path: str) -> ChartPage:
    try:
        return chartir.parse(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ChartError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        target = Path(path)
        tmp = target.with_name(target.name + ".tmp")
        tmp.write_text(text, encoding="utf-8")
        tmp.replace(target)


def _pages(value: str) -> list[int]:
    try:
        pages = sorted({int(p) for p in value.split(",")})
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad page list {value!r}") from None
    if any(not 2 <= p <= 5 for p in pages):
        raise argparse.ArgumentTypeError("pages must be within 2..5")
    return pages


def cmd_extract(args) -> int:
    try:
        document = Path(args.source).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {args.source}: {exc.strerror}", file=sys.stderr)
        return 2
    charts = extract_document(document)
    if args.chart:
        charts = [c for c in charts if c.chart_id == args.chart]
        if not charts:
            print(f"error: no chart named {args.chart}", file=sys.stderr)
            return 2
    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    for chart in charts:
        path = out_dir / f"{chart.chart_id}{chartir.EXTENSION}"
        _write(str(path), chartir.serialize(chart))
        print(
            f"{chart.chart_id} classes={len(chart.classes)}"
            f" struct={len(chart.struct_edges)} diff={len(chart.diff_edges)}"
            f" ext={len(chart.extension_edges)} towers={len(chart.towers)}"
        )
    return 0


def cmd_validate(args) -> int:
    lines = []
    worst = 0
    for path in args.charts:
        chart = _read_chart(path)
        for f in validate_structure(chart):
            lines.append(f.record() if args.format == "records" else f.render())
            if f.severity == "error":
                worst = 1
    _write(args.out, "\n".join(lines) + "\n" if lines else "no findings\n")
    return worst


def cmd_turn(args) -> int:
    chart = _read_chart(args.chart_file)
    computed = turn_page(
        chart, args.pages, args.window, include_uncertain=args.include_uncertain
    )
    lines = [f"turned {chart.chart_id} pages {','.join(map(str, computed.pages))}"]
    for bid in sorted(computed.summands):
        lines.append(
            f"({bid[0]},{bid[1]}) {summand_tokens(computed.summands[bid])}"
        )
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_diff(args) -> int:
    source = _read_chart(args.source_file)
    published = _read_chart(args.published_file)
    pages = args.pages
    if pages is None:
        implied = {
            "E2": [2], "E3": [3], "E4": [4, 5], "cohomology": [2],
        }.get(source.page)
        if implied is None:
            print("error: --pages required for this source page", file=sys.stderr)
            return 2
        pages = implied
    window = args.window
    if window is None:
        candidates = [w for w in (source.window("classes"),
                                  published.window("classes")) if w is not None]
        window = min(candidates) if candidates else 70
    computed = turn_page(
        source, pages, window, include_uncertain=args.include_uncertain
    )
    report = compare(computed, published, window)
    _write(args.out, report.render())
    return 0 if report.is_empty() else 1


def cmd_render(args) -> int:
    chart = _read_chart(args.chart_file)
    if args.window is not None:
        chart = restrict(chart, args.window)
    _write(args.out, render(chart, StyleProfile()))
    return 0


def cmd_stats(args) -> int:
    lines = []
    for path in args.charts:
        chart = _read_chart(path)
        prefix = f"stat {chart.chart_id} " if args.format == "records" else ""
        if not prefix:
            lines.append(f"chart {chart.chart_id}")
        lines.append(f"{prefix}classes {len(chart.classes)}")
        orders = Counter(order_token(c.tau_order) for c in chart.classes)
        for token in sorted(orders):
            lines.append(f"{prefix}order {token} {orders[token]}")
        species = Counter()
        for e in chart.struct_edges:
            species[f"struct:{e.kind}"] += 1
        for e in chart.diff_edges:
            species[f"diff:d{e.page}"] += 1
        for e in chart.extension_edges:
            species[f"ext:{e.kind}"] += 1
        for t in chart.towers:
            species[f"tower:{t.kind}"] += 1
        for token in sorted(species):
            lines.append(f"{prefix}species {token} {species[token]}")
        by_bidegree = Counter(c.bidegree for c in chart.classes)
        for s, f in sorted(by_bidegree):
            lines.append(f"{prefix}bidegree ({s},{f}) {by_bidegree[(s, f)]}")
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_ctau(args) -> int:
    sphere = _read_chart(args.sphere_file)
    ctau = _read_chart(args.ctau_file)
    shift, findings = ctau_check(sphere, ctau, args.window or 59)
    lines = [f"top-cell shift ({shift[0]:+d},{shift[1]:+d})"]
    lines += [
        f.record() if args.format == "records" else f.render() for f in findings
    ]
    _write(args.out, "\n".join(lines) + "\n")
    return 0 if not findings else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adamscharts",
        description="Chart toolkit: extraction, validation, page turning,"
        " diffing, rendering, statistics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="parse a chart document into chartir files")
    p.add_argument("source", help="chart document (text)")
    p.add_argument("--chart", help="only this chart id", default=None)
    p.add_argument("--out", help="output directory", default=None)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("validate", help="check legend-level laws")
    p.add_argument("charts", nargs="+", help="chartir files")
    p.add_argument("--format", choices=("text", "records"), default="text")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("turn", help="compute the next page of a chart")
    p.add_argument("chart_file", help="chartir file")
    p.add_argument("--page", dest="pages", type=_pages, required=True,
                   help="comma-separated differential pages, e.g. 2 or 4,5")
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--include-uncertain", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_turn)

    p = sub.add_parser("diff", help="turn a page and diff against a published chart")
    p.add_argument("source_file", help="chartir file to turn")
    p.add_argument("published_file", help="published chartir file to compare")
    p.add_argument("--page", dest="pages", type=_pages, default=None)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--include-uncertain", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("render", help="render a chart to SVG")
    p.add_argument("chart_file", help="chartir file")
    p.add_argument("--window", type=int, default=None,
                   help="restrict to stems 0..window before rendering")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("stats", help="class and edge statistics")
    p.add_argument("charts", nargs="+", help="chartir files")
    p.add_argument("--format", choices=("text", "records"), default="text")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("ctau", help="cofiber-of-tau cell-count identity")
    p.add_argument("sphere_file", help="sphere chartir file")
    p.add_argument("ctau_file", help="cofiber-of-tau chartir file")
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--format", choices=("text", "records"), default="text")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_ctau)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ChartError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
