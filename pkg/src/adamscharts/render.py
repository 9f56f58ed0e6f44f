"""Deterministic SVG rendering of chart pages.

The output mirrors the printed conventions: filtration grows upward, a
light grid every two units, dots and squares at their nudged positions,
line slopes implied by endpoints, dashes for uncertain edges, dots for
May-hidden ones, arrows for towers, labels at their recorded angular
offsets.  Identical chart and style always produce identical bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .model import ChartError, ChartPage, tower_step

ORDER_KEYS = ("dot:free", "dot:1", "dot:2", "dot:3", "dot:4")
PROVENANCE_KEYS = ("dot:bottom_cell", "dot:top_cell")
LINE_KEYS = (
    "line:plain", "line:tau1", "line:tau2",
    "line:bottom_cell", "line:top_cell", "line:hidden",
)
DIFF_KEYS = ("diff:2", "diff:3", "diff:4", "diff:5", "diff:tau1", "diff:tau2")
EXT_KEYS = ("ext:two", "ext:eta", "ext:nu", "ext:tau")
TOWER_KEYS = ("tower:h0_tower", "tower:h1_tower")
REQUIRED_KEYS = ORDER_KEYS + PROVENANCE_KEYS + LINE_KEYS + DIFF_KEYS + EXT_KEYS + TOWER_KEYS


class IncompleteStyleError(ChartError):
    pass


DEFAULT_COLORS = {
    "dot:free": "#000000",
    "dot:1": "#cc0000",
    "dot:2": "#0044cc",
    "dot:3": "#008800",
    "dot:4": "#880088",
    "dot:bottom_cell": "#000000",
    "dot:top_cell": "#cc0000",
    "line:plain": "#000000",
    "line:tau1": "#dd00dd",
    "line:tau2": "#ee7700",
    "line:bottom_cell": "#000000",
    "line:top_cell": "#cc0000",
    "line:hidden": "#0044cc",
    "diff:2": "#44aadd",
    "diff:3": "#cc0000",
    "diff:4": "#008800",
    "diff:5": "#0000cc",
    "diff:tau1": "#dd00dd",
    "diff:tau2": "#ee7700",
    "ext:two": "#808000",
    "ext:eta": "#880088",
    "ext:nu": "#774411",
    "ext:tau": "#557788",
    "tower:h0_tower": "#000000",
    "tower:h1_tower": "#cc0000",
}


@dataclass(frozen=True)
class StyleProfile:
    """Visual parameters; every semantic kind needs a color entry."""

    unit: float = 24.0
    dot_radius: float = 0.08
    grid_spacing: int = 2
    label_size: float = 0.28
    label_offset: float = 0.22
    margin: float = 1.0
    colors: Mapping[str, str] = field(default_factory=lambda: dict(DEFAULT_COLORS))

    def color(self, key: str) -> str:
        try:
            return self.colors[key]
        except KeyError:
            raise IncompleteStyleError(f"style has no entry for {key!r}") from None


def _fmt(value: float) -> str:
    out = f"{value:.2f}"
    return out.rstrip("0").rstrip(".") if "." in out else out


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )


def render(chart: ChartPage, style: StyleProfile | None = None) -> str:
    """Render one chart page into a standalone SVG document."""
    style = style or StyleProfile()
    for key in REQUIRED_KEYS:
        style.color(key)

    max_stem = max((c.stem for c in chart.classes), default=0) + 1
    max_filt = max((c.filtration for c in chart.classes), default=0) + 1
    max_stem = min(max_stem - max_stem % -style.grid_spacing, 1000)
    max_filt = min(max_filt - max_filt % -style.grid_spacing, 1000)
    u = style.unit
    width = (max_stem + 2 * style.margin) * u
    height = (max_filt + 2 * style.margin) * u

    def x(stem: float) -> float:
        return (stem + style.margin) * u

    def y(filt: float) -> float:
        return height - (filt + style.margin) * u

    def pos(cid: str) -> tuple[float, float]:
        s, f, n = chart.position(cid)
        return x(s + n / 10), y(f)

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1"'
        f' width="{_fmt(width)}" height="{_fmt(height)}"'
        f' viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        f'<!-- {chart.chart_id} -->',
    ]
    grid = ['<g stroke="#dddddd" stroke-width="1">']
    for s in range(0, max_stem + 1, style.grid_spacing):
        grid.append(
            f'<line x1="{_fmt(x(s))}" y1="{_fmt(y(0))}"'
            f' x2="{_fmt(x(s))}" y2="{_fmt(y(max_filt))}"/>'
        )
    for f in range(0, max_filt + 1, style.grid_spacing):
        grid.append(
            f'<line x1="{_fmt(x(0))}" y1="{_fmt(y(f))}"'
            f' x2="{_fmt(x(max_stem))}" y2="{_fmt(y(f))}"/>'
        )
    grid.append("</g>")
    lines.extend(grid)

    def dash(uncertain: bool, may_hidden: bool = False) -> str:
        if uncertain:
            return f' stroke-dasharray="{_fmt(u * 0.25)} {_fmt(u * 0.12)}"'
        if may_hidden:
            return f' stroke-dasharray="{_fmt(u * 0.05)} {_fmt(u * 0.1)}"'
        return ""

    def edge_line(cid1: str, cid2: str, color: str, extra: str) -> str:
        x1, y1 = pos(cid1)
        x2, y2 = pos(cid2)
        return (
            f'<path d="M {_fmt(x1)} {_fmt(y1)} L {_fmt(x2)} {_fmt(y2)}"'
            f' stroke="{color}" stroke-width="1.5" fill="none"{extra}/>'
        )

    lines.append('<g id="struct">')
    for e in sorted(chart.struct_edges, key=lambda e: e.sort_key()):
        if e.tau_power == 1:
            key = "line:tau1"
        elif e.tau_power >= 2:
            key = "line:tau2"
        elif e.provenance != "none":
            key = f"line:{e.provenance}"
        else:
            key = "line:plain"
        lines.append(
            edge_line(e.source, e.target, style.color(key),
                      dash(e.uncertain, e.may_hidden))
        )
    lines.append("</g>")

    lines.append('<g id="diff">')
    for e in sorted(chart.diff_edges, key=lambda e: e.sort_key()):
        if e.tau_power == 1:
            key = "diff:tau1"
        elif e.tau_power >= 2:
            key = "diff:tau2"
        else:
            key = f"diff:{e.page}"
        lines.append(edge_line(e.source, e.target, style.color(key), dash(e.uncertain)))
    lines.append("</g>")

    lines.append('<g id="ext">')
    for e in sorted(chart.extension_edges, key=lambda e: e.sort_key()):
        lines.append(
            edge_line(e.source, e.target, style.color(f"ext:{e.kind}"),
                      dash(e.uncertain))
        )
    lines.append("</g>")

    lines.append('<g id="towers">')
    for t in sorted(chart.towers, key=lambda t: t.sort_key()):
        x1, y1 = pos(t.base)
        ds, df = tower_step(t.kind)
        x2 = x1 + 0.7 * ds * u
        y2 = y1 - 0.7 * df * u
        color = style.color(f"tower:{t.kind}")
        ang = math.atan2(y2 - y1, x2 - x1)
        head = 0.15 * u
        hx1 = x2 - head * math.cos(ang - 0.5)
        hy1 = y2 - head * math.sin(ang - 0.5)
        hx2 = x2 - head * math.cos(ang + 0.5)
        hy2 = y2 - head * math.sin(ang + 0.5)
        lines.append(
            f'<path d="M {_fmt(x1)} {_fmt(y1)} L {_fmt(x2)} {_fmt(y2)}'
            f' M {_fmt(hx1)} {_fmt(hy1)} L {_fmt(x2)} {_fmt(y2)}'
            f' L {_fmt(hx2)} {_fmt(hy2)}"'
            f' stroke="{color}" stroke-width="1.5" fill="none"/>'
        )
    lines.append("</g>")

    lines.append('<g id="classes">')
    for c in sorted(chart.classes, key=lambda c: c.sort_key()):
        cx, cy = x(c.stem + c.nudge / 10), y(c.filtration)
        if c.provenance != "none":
            color = style.color(f"dot:{c.provenance}")
        elif c.tau_order is None:
            color = style.color("dot:free")
        else:
            color = style.color(f"dot:{c.tau_order}")
        if c.hidden_tau_marker:
            r = style.dot_radius * 1.3 * u
            lines.append(
                f'<rect x="{_fmt(cx - r)}" y="{_fmt(cy - r)}"'
                f' width="{_fmt(2 * r)}" height="{_fmt(2 * r)}" fill="{color}"/>'
            )
        else:
            lines.append(
                f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}"'
                f' r="{_fmt(style.dot_radius * u)}" fill="{color}"/>'
            )
    lines.append("</g>")

    lines.append('<g id="labels">')
    for c in sorted(chart.classes, key=lambda c: c.sort_key()):
        if c.name is None:
            continue
        angle = math.radians(c.label_angle or 0)
        cx = x(c.stem + c.nudge / 10) + style.label_offset * u * math.cos(angle)
        cy = y(c.filtration) - style.label_offset * u * math.sin(angle)
        anchor = "start" if math.cos(angle) > 0.3 else (
            "end" if math.cos(angle) < -0.3 else "middle"
        )
        lines.append(
            f'<text x="{_fmt(cx)}" y="{_fmt(cy)}"'
            f' font-size="{_fmt(style.label_size * u)}" text-anchor="{anchor}">'
            f"{_escape(c.name)}</text>"
        )
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
