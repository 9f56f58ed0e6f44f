"""chartir v1: canonical line-oriented text serialization of chart pages.

One record per line, positional fields separated by single spaces, names
percent-escaped so the format stays line-oriented.  Records are sorted
canonically (classes by bidegree and offset, then edges by species, source
and target), which makes byte equality meaningful: the same chart always
serializes to the same bytes, and parse() rejects documents whose records
are out of order rather than silently re-sorting them.
"""

from __future__ import annotations

from typing import Iterable, Optional

from .model import (
    ChartError,
    ChartPage,
    ClassNode,
    CompletenessWindow,
    DiffEdge,
    EXTENSION_KINDS,
    ExtensionEdge,
    PAGES,
    STRUCT_KINDS,
    StructEdge,
    TOWER_KINDS,
    TowerArrow,
    VARIANTS,
)

FORMAT_LINE = "chartir 1"
EXTENSION = ".chartir"

_WINDOW_FEATURES = ("classes", "d2", "d3", "d4", "d5", "hidden_extensions")
_PROV_TOKENS = {"none": "-", "bottom_cell": "b", "top_cell": "t", "hidden": "h"}
_PROV_FROM_TOKEN = {v: k for k, v in _PROV_TOKENS.items()}


class ChartirError(ChartError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def escape(text: str) -> str:
    out = []
    for ch in text:
        if ch == "%":
            out.append("%25")
        elif ch == " ":
            out.append("%20")
        elif ch == "\n":
            out.append("%0A")
        elif ch == "\r":
            out.append("%0D")
        elif ch == "\t":
            out.append("%09")
        else:
            out.append(ch)
    escaped = "".join(out)
    return "%2D" if escaped == "-" else escaped


def unescape(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        if text[i] == "%":
            code = text[i + 1:i + 3]
            if len(code) != 2:
                raise ChartirError(f"truncated escape in {text!r}")
            out.append(chr(int(code, 16)))
            i += 3
        else:
            out.append(text[i])
            i += 1
    return "".join(out)


def _flags(pairs: Iterable[tuple[str, bool]]) -> str:
    s = "".join(ch for ch, on in pairs if on)
    return s or "-"


def _class_record(c: ClassNode) -> str:
    order = "free" if c.tau_order is None else str(c.tau_order)
    flags = _flags([("q", c.hidden_tau_marker)])
    angle = "-" if c.label_angle is None else str(c.label_angle)
    name = "-" if c.name is None else escape(c.name)
    return (
        f"class {c.stem} {c.filtration} {c.nudge:+d} {c.dup} {order} {flags}"
        f" {_PROV_TOKENS[c.provenance]} {angle} {name}"
    )


def _struct_record(e: StructEdge) -> str:
    flags = _flags([("m", e.may_hidden), ("u", e.uncertain)])
    return (
        f"struct {e.kind} {e.source} {e.target} {e.tau_power} {flags}"
        f" {_PROV_TOKENS[e.provenance]}"
    )


def _diff_record(e: DiffEdge) -> str:
    flags = _flags([("u", e.uncertain)])
    return f"diff {e.page} {e.source} {e.target} {e.tau_power} {flags}"


def _ext_record(e: ExtensionEdge) -> str:
    flags = _flags([("u", e.uncertain)])
    return f"ext {e.kind} {e.source} {e.target} {flags}"


def _tower_record(t: TowerArrow) -> str:
    flags = _flags([("t", t.tau_annihilated)])
    return f"tower {t.kind} {t.base} {flags}"


def serialize(chart: ChartPage) -> str:
    """Render a chart as canonical chartir text (newline-terminated)."""
    lines = [FORMAT_LINE, f"chart {chart.variant} {chart.page}"]
    for w in sorted(chart.windows, key=lambda w: _WINDOW_FEATURES.index(w.feature)):
        lines.append(f"window {w.feature} {w.max_stem}")
    lines.extend(_class_record(c) for c in sorted(chart.classes, key=ClassNode.sort_key))
    lines.extend(
        _struct_record(e) for e in sorted(chart.struct_edges, key=StructEdge.sort_key)
    )
    lines.extend(_diff_record(e) for e in sorted(chart.diff_edges, key=DiffEdge.sort_key))
    lines.extend(
        _ext_record(e) for e in sorted(chart.extension_edges, key=ExtensionEdge.sort_key)
    )
    lines.extend(_tower_record(t) for t in sorted(chart.towers, key=TowerArrow.sort_key))
    return "\n".join(lines) + "\n"


def _parse_int(token: str, what: str, line: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise ChartirError(f"bad {what} {token!r}", line) from None


def _parse_flags(token: str, allowed: str, line: int) -> set[str]:
    if token == "-":
        return set()
    if not token or any(ch not in allowed for ch in token):
        raise ChartirError(f"bad flags {token!r}", line)
    return set(token)


def _parse_prov(token: str, line: int) -> str:
    if token not in _PROV_FROM_TOKEN:
        raise ChartirError(f"bad provenance {token!r}", line)
    return _PROV_FROM_TOKEN[token]


def _parse_class(fields: list[str], line: int) -> ClassNode:
    if len(fields) != 9:
        raise ChartirError(f"class record needs 9 fields, got {len(fields)}", line)
    stem = _parse_int(fields[0], "stem", line)
    filt = _parse_int(fields[1], "filtration", line)
    nudge = _parse_int(fields[2], "nudge", line)
    dup = _parse_int(fields[3], "dup", line)
    if fields[4] == "free":
        order = None
    else:
        order = _parse_int(fields[4], "tau order", line)
        if not 1 <= order <= 4:
            raise ChartirError(f"tau order {order} out of range", line)
    flags = _parse_flags(fields[5], "q", line)
    prov = _parse_prov(fields[6], line)
    angle = None if fields[7] == "-" else _parse_int(fields[7], "angle", line)
    name = None if fields[8] == "-" else unescape(fields[8])
    return ClassNode(
        stem=stem, filtration=filt, nudge=nudge, dup=dup, tau_order=order,
        hidden_tau_marker="q" in flags, provenance=prov, label_angle=angle,
        name=name,
    )


def _parse_struct(fields: list[str], line: int) -> StructEdge:
    if len(fields) != 6:
        raise ChartirError(f"struct record needs 6 fields, got {len(fields)}", line)
    if fields[0] not in STRUCT_KINDS:
        raise ChartirError(f"bad struct kind {fields[0]!r}", line)
    flags = _parse_flags(fields[4], "mu", line)
    return StructEdge(
        kind=fields[0], source=fields[1], target=fields[2],
        tau_power=_parse_int(fields[3], "tau power", line),
        may_hidden="m" in flags, uncertain="u" in flags,
        provenance=_parse_prov(fields[5], line),
    )


def _parse_diff(fields: list[str], line: int) -> DiffEdge:
    if len(fields) != 5:
        raise ChartirError(f"diff record needs 5 fields, got {len(fields)}", line)
    page = _parse_int(fields[0], "page", line)
    if not 2 <= page <= 5:
        raise ChartirError(f"differential page {page} out of range", line)
    flags = _parse_flags(fields[4], "u", line)
    return DiffEdge(
        page=page, source=fields[1], target=fields[2],
        tau_power=_parse_int(fields[3], "tau power", line),
        uncertain="u" in flags,
    )


def _parse_ext(fields: list[str], line: int) -> ExtensionEdge:
    if len(fields) != 4:
        raise ChartirError(f"ext record needs 4 fields, got {len(fields)}", line)
    if fields[0] not in EXTENSION_KINDS:
        raise ChartirError(f"bad extension kind {fields[0]!r}", line)
    flags = _parse_flags(fields[3], "u", line)
    return ExtensionEdge(
        kind=fields[0], source=fields[1], target=fields[2], uncertain="u" in flags
    )


def _parse_tower(fields: list[str], line: int) -> TowerArrow:
    if len(fields) != 3:
        raise ChartirError(f"tower record needs 3 fields, got {len(fields)}", line)
    if fields[0] not in TOWER_KINDS:
        raise ChartirError(f"bad tower kind {fields[0]!r}", line)
    flags = _parse_flags(fields[2], "t", line)
    return TowerArrow(kind=fields[0], base=fields[1], tau_annihilated="t" in flags)


_RECORD_ORDER = ("window", "class", "struct", "diff", "ext", "tower")


def parse(text: str) -> ChartPage:
    """Parse canonical chartir text back into a chart page."""
    if not text:
        raise ChartirError("missing header: empty document")
    lines = text.split("\n")
    if lines[-1] != "":
        raise ChartirError("document must end with a newline", len(lines))
    lines = lines[:-1]
    if not lines or lines[0] != FORMAT_LINE:
        got = lines[0] if lines else ""
        raise ChartirError(f"expected {FORMAT_LINE!r}, got {got!r}", 1)
    if len(lines) < 2 or not lines[1].startswith("chart "):
        raise ChartirError("missing chart record", 2)
    head = lines[1].split(" ")
    if len(head) != 3:
        raise ChartirError("chart record needs variant and page", 2)
    variant, page = head[1], head[2]
    if variant not in VARIANTS:
        raise ChartirError(f"unknown variant {variant!r}", 2)
    if page not in PAGES:
        raise ChartirError(f"unknown page {page!r}", 2)

    windows: list[CompletenessWindow] = []
    classes: list[ClassNode] = []
    structs: list[StructEdge] = []
    diffs: list[DiffEdge] = []
    exts: list[ExtensionEdge] = []
    towers: list[TowerArrow] = []
    section = 0
    prev_key: Optional[tuple] = None

    for i, raw in enumerate(lines[2:], start=3):
        if raw != raw.rstrip():
            raise ChartirError("trailing whitespace", i)
        fields = raw.split(" ")
        record = fields[0]
        if record not in _RECORD_ORDER:
            raise ChartirError(f"unknown record {record!r}", i)
        idx = _RECORD_ORDER.index(record)
        if idx < section:
            raise ChartirError(f"{record} record out of section order", i)
        if idx > section:
            section = idx
            prev_key = None
        body = fields[1:]
        if record == "window":
            if len(body) != 2 or body[0] not in _WINDOW_FEATURES:
                raise ChartirError(f"bad window record {raw!r}", i)
            windows.append(
                CompletenessWindow(body[0], _parse_int(body[1], "max stem", i))
            )
            key: tuple = (_WINDOW_FEATURES.index(body[0]),)
        elif record == "class":
            node = _parse_class(body, i)
            classes.append(node)
            key = node.sort_key()
        elif record == "struct":
            edge = _parse_struct(body, i)
            structs.append(edge)
            key = edge.sort_key()
        elif record == "diff":
            dedge = _parse_diff(body, i)
            diffs.append(dedge)
            key = dedge.sort_key()
        elif record == "ext":
            eedge = _parse_ext(body, i)
            exts.append(eedge)
            key = eedge.sort_key()
        else:
            tower = _parse_tower(body, i)
            towers.append(tower)
            key = tower.sort_key()
        if prev_key is not None and key < prev_key:
            raise ChartirError(f"{record} record out of canonical order", i)
        if record == "class" and key == prev_key:
            raise ChartirError("duplicate class record", i)
        prev_key = key

    chart = ChartPage(
        variant=variant,
        page=page,
        windows=tuple(windows),
        classes=tuple(classes),
        struct_edges=tuple(structs),
        diff_edges=tuple(diffs),
        extension_edges=tuple(exts),
        towers=tuple(towers),
    )
    chart.by_id  # force the duplicate-id check
    for kind, edges in (
        ("struct", structs), ("diff", diffs), ("ext", exts)
    ):
        for e in edges:
            for endpoint in (e.source, e.target):
                if not chart.has_ref(endpoint):
                    raise ChartirError(
                        f"{kind} edge references unknown class {endpoint!r}"
                    )
    for t in towers:
        if t.base not in chart.by_id:
            raise ChartirError(f"tower based on unknown class {t.base!r}")
    return chart
