"""Extraction of chart pages from the embedded picture-environment source.

The pipeline is scan_blocks -> parse_commands -> assemble.  The lexical
layer knows a fixed command vocabulary (filled circles, small frames,
lines, arrows, four-point extension curves, labels, the grid); everything
else in a block is a parse error.  Assembly snaps coordinates to the
integer bidegree grid, applies the block's legend profile, and resolves
every line endpoint to a class.

Coordinate snapping is cluster-aware: markers sharing a bidegree are drawn
as a symmetric spread of tenth-offsets around the integer stem, so dots on
one row are grouped by gaps and the group's mean locates the stem.  This
recovers spreads as wide as +-0.5 without ambiguity; the plain snap()
refuses offsets beyond 0.35 as the safe single-coordinate rule.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from typing import Optional

from .legends import BY_TAG, DiffStyle, DotStyle, LegendProfile, LineStyle
from .model import (
    ChartError,
    ChartPage,
    ClassNode,
    DiffEdge,
    ExtensionEdge,
    StructEdge,
    TowerArrow,
    MAX_FILTRATION,
    MAX_STEM,
    class_id,
    split_tower_ref,
    struct_shift,
    tower_member_id,
    tower_step,
)


class ParseError(ChartError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class UnmappedColorError(ParseError):
    pass


class AmbiguousCoordinateError(ParseError):
    pass


class DanglingEdgeError(ParseError):
    pass


class DuplicateClassError(ParseError):
    pass


@dataclass(frozen=True)
class Primitive:
    """One drawing command, lexed but not yet interpreted."""

    kind: str  # dot | square | line | arrow_line | curve | label | grid
    points: tuple[tuple[float, float], ...]
    color: str = "DEFAULT"
    linestyle: str = "solid"
    text: Optional[str] = None
    angle: Optional[int] = None
    macro: Optional[str] = None  # two|eta|nu|tau for extension macros; rput for numerals
    line: int = 0


@dataclass(frozen=True)
class Block:
    tag: str
    text: str
    first_line: int  # 1-based document line of the block's first content line


@dataclass(frozen=True)
class Semantic:
    """What a color/linestyle pair means under one legend profile."""

    category: str  # dot | square | struct | diff | tower
    dot: Optional[DotStyle] = None
    struct: Optional[LineStyle] = None
    diff: Optional[DiffStyle] = None
    tower_kind: Optional[str] = None
    may_hidden: bool = False
    uncertain: bool = False


BEGIN_RE = re.compile(r"\\begin\{pspicture\}")
END_RE = re.compile(r"\\end\{pspicture\}")
LABEL_RE = re.compile(r"\\label\{([^{}]*)\}")


def scan_blocks(document: str) -> list[Block]:
    """Locate every picture block and tag it with its section label.

    Blocks appear in document order.  An unterminated block is an error
    naming the line of the open delimiter.
    """
    lines = document.split("\n")
    tags = LABEL_RE.findall(document)
    blocks: list[tuple[int, int]] = []
    open_line: Optional[int] = None
    for i, text in enumerate(lines):
        if BEGIN_RE.search(text):
            if open_line is not None:
                raise ParseError("nested picture block", line=i + 1)
            open_line = i
        if END_RE.search(text):
            if open_line is None:
                raise ParseError("stray end of picture block", line=i + 1)
            blocks.append((open_line, i))
            open_line = None
    if open_line is not None:
        raise ParseError("unterminated picture block", line=open_line + 1)
    if blocks and len(tags) < len(blocks):
        raise ParseError(
            f"{len(blocks)} picture blocks but only {len(tags)} section labels"
        )
    out = []
    for tag, (start, end) in zip(tags, blocks):
        body = "\n".join(lines[start + 1:end])
        out.append(Block(tag=tag, text=body, first_line=start + 2))
    return out


_NUMBER = r"-?\d+(?:\.\d+)?"
_TOKEN_RE = re.compile(r"\\([a-zA-Z]+\*?)")
_OPTS_RE = re.compile(r"\[([^\]]*)\]")
_PAIR_RE = re.compile(rf"\(\s*({_NUMBER})\s*,\s*({_NUMBER})\s*\)")
_BAD_PAIR_RE = re.compile(r"\(([^()]*)\)")
_ARROW_RE = re.compile(r"\{->\}")
_BRACE_ARG_RE = re.compile(r"\{")
_ANGLE_RE = re.compile(r"\[\s*(-?\d+)\s*\]")
_OFFSET_RE = re.compile(rf"\{{\s*({_NUMBER})\s*\}}")

_EXT_MACROS = {
    "twoextn": "two", "etaextn": "eta", "nuextn": "nu", "tauextn": "tau",
    "twoextncurve": "two", "etaextncurve": "eta", "nuextncurve": "nu",
    "tauextncurve": "tau",
}

_IGNORED = {"psset", "scriptsize", "small", "footnotesize", "normalsize"}


class _Cursor:
    def __init__(self, text: str, first_line: int):
        self.text = text
        self.pos = 0
        self.first_line = first_line

    def line_at(self, pos: int) -> int:
        return self.first_line + self.text.count("\n", 0, pos)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t\n\r":
            self.pos += 1

    def take_opts(self) -> str:
        self.skip_ws()
        m = _OPTS_RE.match(self.text, self.pos)
        if not m:
            return ""
        self.pos = m.end()
        return m.group(1)

    def take_pair(self, command: str) -> tuple[float, float]:
        self.skip_ws()
        m = _PAIR_RE.match(self.text, self.pos)
        if not m:
            bad = _BAD_PAIR_RE.match(self.text, self.pos)
            token = bad.group(0) if bad else self.text[self.pos:self.pos + 20]
            raise ParseError(
                f"malformed coordinate pair {token!r} after \\{command}",
                line=self.line_at(self.pos),
            )
        self.pos = m.end()
        return (float(m.group(1)), float(m.group(2)))

    def maybe_pair(self) -> Optional[tuple[float, float]]:
        self.skip_ws()
        m = _PAIR_RE.match(self.text, self.pos)
        if not m:
            return None
        self.pos = m.end()
        return (float(m.group(1)), float(m.group(2)))

    def take_arrow(self) -> bool:
        self.skip_ws()
        m = _ARROW_RE.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            return True
        return False

    def take_braced(self, command: str) -> str:
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != "{":
            raise ParseError(
                f"missing braced argument after \\{command}",
                line=self.line_at(self.pos),
            )
        depth = 0
        start = self.pos
        for i in range(self.pos, len(self.text)):
            ch = self.text[i]
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    self.pos = i + 1
                    return self.text[start + 1:i]
        raise ParseError(
            f"unbalanced braces after \\{command}", line=self.line_at(start)
        )

    def take_angle(self, command: str) -> int:
        self.skip_ws()
        m = _ANGLE_RE.match(self.text, self.pos)
        if not m:
            raise ParseError(
                f"missing [angle] after \\{command}", line=self.line_at(self.pos)
            )
        self.pos = m.end()
        return int(m.group(1))

    def maybe_offset(self) -> Optional[float]:
        self.skip_ws()
        m = _OFFSET_RE.match(self.text, self.pos)
        if not m:
            return None
        self.pos = m.end()
        return float(m.group(1))


def _opt_value(opts: str, key: str) -> Optional[str]:
    m = re.search(rf"{key}\s*=\s*([A-Za-z0-9.]+)", opts)
    return m.group(1) if m else None


def _style_of(opts: str) -> str:
    style = _opt_value(opts, "linestyle")
    return style if style in ("dashed", "dotted") else "solid"


def parse_commands(block: str, first_line: int = 1) -> list[Primitive]:
    """Lex one picture block into primitives, in drawing order."""
    cur = _Cursor(block, first_line)
    out: list[Primitive] = []
    while True:
        m = _TOKEN_RE.search(cur.text, cur.pos)
        if not m:
            break
        cur.pos = m.end()
        name = m.group(1)
        line = cur.line_at(m.start())
        if name in _IGNORED:
            if name == "psset":
                cur.take_braced(name)
            continue
        if name == "psgrid":
            opts = cur.take_opts()
            p1 = cur.take_pair(name)
            p2 = cur.take_pair(name)
            unit = float(_opt_value(opts, "unit") or 1)
            pts = tuple((x * unit, y * unit) for x, y in (p1, p2))
            out.append(Primitive("grid", pts, line=line))
        elif name == "psline":
            opts = cur.take_opts()
            arrow = cur.take_arrow()
            p1 = cur.take_pair(name)
            p2 = cur.take_pair(name)
            out.append(
                Primitive(
                    "arrow_line" if arrow else "line",
                    (p1, p2),
                    color=_opt_value(opts, "linecolor") or "DEFAULT",
                    linestyle=_style_of(opts),
                    line=line,
                )
            )
        elif name == "pscircle*":
            opts = cur.take_opts()
            p = cur.take_pair(name)
            cur.take_braced(name)  # radius
            out.append(
                Primitive(
                    "dot", (p,),
                    color=_opt_value(opts, "linecolor") or "DEFAULT",
                    line=line,
                )
            )
        elif name == "psframe":
            opts = cur.take_opts()
            p1 = cur.take_pair(name)
            p2 = cur.take_pair(name)
            center = ((p1[0] + p2[0]) / 2, (p1[1] + p2[1]) / 2)
            out.append(
                Primitive(
                    "square", (center,),
                    color=_opt_value(opts, "fillcolor") or "DEFAULT",
                    line=line,
                )
            )
        elif name == "uput":
            offset = cur.maybe_offset()
            angle = cur.take_angle(name)
            p = cur.take_pair(name)
            text = cur.take_braced(name)
            out.append(
                Primitive(
                    "label", (p,),
                    text=re.sub(r"\s+", " ", text).strip(),
                    angle=angle,
                    macro=None if offset is not None else "title",
                    line=line,
                )
            )
        elif name == "rput":
            p = cur.take_pair(name)
            text = cur.take_braced(name)
            out.append(
                Primitive("label", (p,), text=text, macro="rput", line=line)
            )
        elif name in _EXT_MACROS:
            opts = cur.take_opts()
            pts = [cur.take_pair(name)]
            while True:
                p = cur.maybe_pair()
                if p is None:
                    break
                pts.append(p)
            expected = 4 if name.endswith("curve") else 2
            if len(pts) != expected:
                raise ParseError(
                    f"\\{name} takes {expected} points, got {len(pts)}", line=line
                )
            out.append(
                Primitive(
                    "curve" if expected == 4 else "line",
                    tuple(pts),
                    macro=_EXT_MACROS[name],
                    linestyle=_style_of(opts),
                    line=line,
                )
            )
        else:
            raise ParseError(f"unknown drawing command \\{name}", line=line)
    return out


def snap(coordinate: float) -> tuple[int, float]:
    """Nearest grid value and the residual draw offset.

    Offsets beyond 0.35 are refused: a lone coordinate that far from the
    grid cannot be assigned a stem safely (cluster snapping in assemble
    handles the wide symmetric spreads).
    """
    value = math.floor(coordinate + 0.5)
    nudge = coordinate - value
    if abs(nudge) > 0.35:
        raise AmbiguousCoordinateError(
            f"coordinate {coordinate} is {nudge:+.2f} off the grid"
        )
    return value, nudge


def _snap_exact(coordinate: float, what: str, line: int) -> int:
    value, nudge = snap(coordinate)
    if abs(nudge) > 0.051:
        raise ParseError(f"{what} {coordinate} is off the integer grid", line=line)
    return value


def _cluster_stems(xs: list[float]) -> list[int]:
    """Assign a stem to each x of one row, clustering symmetric spreads.

    xs must be sorted.  Returns the stem for each entry, in order.
    """
    stems: list[int] = []
    run: list[float] = []

    def flush() -> None:
        mean = sum(run) / len(run)
        best = None
        for cand in (int(mean // 1), int(mean // 1) + 1):
            offs = [x - cand for x in run]
            if all(abs(o) <= 0.55 for o in offs):
                width = max(abs(o) for o in offs)
                if best is None or width < best[0]:
                    best = (width, cand)
        if best is None:
            raise AmbiguousCoordinateError(
                f"cannot assign a stem to marker cluster at x={run}"
            )
        stems.extend([best[1]] * len(run))

    for x in xs:
        if run and x - run[-1] > 0.25:
            flush()
            run = []
        run.append(x)
    if run:
        flush()
    return stems


def semantics(
    color: str,
    linestyle: str,
    profile: LegendProfile,
    *,
    primitive: str = "line",
) -> Semantic:
    """Resolve a color under one chart's legend.

    The same macro may mean different things per primitive kind (a dot
    color also colors tower arrows on cofiber-of-tau charts), so the
    primitive kind is part of the lookup.
    """
    may_hidden = linestyle == "dotted"
    uncertain = linestyle == "dashed"
    if primitive == "dot":
        style = profile.dots.get(color)
        if style is None:
            raise UnmappedColorError(f"dot color {color!r} not in {profile.tag} legend")
        return Semantic("dot", dot=style)
    if primitive == "square":
        style = profile.squares.get(color)
        if style is None:
            raise UnmappedColorError(
                f"square color {color!r} not in {profile.tag} legend"
            )
        return Semantic("square", dot=style)
    if primitive == "arrow":
        kind = profile.towers.get(color)
        if kind is not None:
            return Semantic("tower", tower_kind=kind)
        style = profile.diff_lines.get(color)
        if style is not None:
            return Semantic("diff", diff=style, uncertain=uncertain)
        raise UnmappedColorError(f"arrow color {color!r} not in {profile.tag} legend")
    # plain lines: differential colors win over the shared dot/struct colors
    diff = profile.diff_lines.get(color)
    struct = profile.struct_lines.get(color)
    if diff is not None and struct is None:
        return Semantic("diff", diff=diff, uncertain=uncertain)
    if struct is not None:
        return Semantic(
            "struct", struct=struct, may_hidden=may_hidden, uncertain=uncertain
        )
    raise UnmappedColorError(f"line color {color!r} not in {profile.tag} legend")


_TITLE_INNER_RE = re.compile(r"\\textsc\{(.*)\}\s*$", re.DOTALL)


def _normalize_title(text: str) -> str:
    m = _TITLE_INNER_RE.search(text)
    inner = m.group(1) if m else text
    return re.sub(r"\s+", " ", inner).strip()


class _Assembler:
    def __init__(self, primitives: list[Primitive], profile: LegendProfile):
        self.prims = primitives
        self.profile = profile
        self.classes: list[ClassNode] = []
        self.node_by_id: dict[str, ClassNode] = {}
        self.class_doc_index: dict[str, int] = {}
        self.by_pos: dict[tuple[int, int], list[str]] = {}
        self.struct_edges: list[StructEdge] = []
        self.diff_edges: list[DiffEdge] = []
        self.extension_edges: list[ExtensionEdge] = []
        self.towers: list[TowerArrow] = []
        self.tower_bases: set[str] = set()
        self.merged: dict[int, int] = {}
        self.notes: list[str] = []

    # -- classes ------------------------------------------------------

    def collect_classes(self) -> None:
        markers = [
            (i, p) for i, p in enumerate(self.prims) if p.kind in ("dot", "square")
        ]
        rows: dict[int, list[tuple[float, int]]] = {}
        for i, p in markers:
            x, y = p.points[0]
            f = _snap_exact(y, "marker filtration", p.line)
            rows.setdefault(f, []).append((x, i))
        seen: dict[tuple[int, int, int], int] = {}
        placed: dict[int, ClassNode] = {}
        for f, row in rows.items():
            row.sort(key=lambda t: (t[0], t[1]))
            stems = _cluster_stems([x for x, _ in row])
            for (x, i), stem in zip(row, stems):
                p = self.prims[i]
                nudge = round((x - stem) * 10)
                if abs((x - stem) * 10 - nudge) > 0.01:
                    raise AmbiguousCoordinateError(
                        f"marker at ({x},{f}) is off the tenths grid", p.line
                    )
                sem = semantics(p.color, p.linestyle, self.profile,
                                primitive=p.kind)
                first = seen.get((stem, f, nudge))
                if first is not None:
                    # a marker drawn twice at the very same spot is one
                    # class; everything incident to it piles onto the merge
                    prev = placed[first]
                    if (prev.tau_order, prev.provenance) != (
                        sem.dot.tau_order, sem.dot.provenance
                    ):
                        raise DuplicateClassError(
                            f"conflicting markers at ({x},{f})", p.line
                        )
                    self.notes.append(
                        f"line {p.line}: repeated marker at ({x},{f}) merged"
                    )
                    placed[i] = prev
                    self.merged[i] = first
                    continue
                seen[(stem, f, nudge)] = i
                node = ClassNode(
                    stem=stem,
                    filtration=f,
                    nudge=nudge,
                    tau_order=sem.dot.tau_order,
                    hidden_tau_marker=(p.kind == "square"),
                    provenance=sem.dot.provenance,
                )
                if p.kind == "square" and self.profile.variant != "motivic":
                    raise ParseError(
                        f"hidden-tau square outside a motivic chart at ({x},{f})",
                        p.line,
                    )
                placed[i] = node
        owners = [i for i in sorted(placed) if i not in self.merged]
        # attach labels: the anchor sits on its class, so accept matches
        # within the label offset radius; ties break by distance then id
        for p in self.prims:
            if p.kind != "label" or p.macro is not None:
                continue
            x, y = p.points[0]
            best = None
            for i in owners:
                node = placed[i]
                d = math.hypot(node.stem + node.nudge / 10 - x,
                               node.filtration - y)
                if d <= 0.06 and (best is None or (d, node.id) < (best[0], best[1].id)):
                    best = (d, node, i)
            if best is None:
                raise ParseError(f"label {p.text!r} attaches to no class", p.line)
            _, node, i = best
            if node.name is not None:
                raise ParseError(f"class {node.id} already labeled", p.line)
            placed[i] = replace(node, name=p.text, label_angle=p.angle)
        for i in owners:
            node = placed[i]
            self.classes.append(node)
            self.node_by_id[node.id] = node
            self.class_doc_index[node.id] = i
            self.by_pos.setdefault(self._pos_key(node), []).append(node.id)

    @staticmethod
    def _pos_key(node: ClassNode) -> tuple[int, int]:
        return (node.stem * 10 + node.nudge, node.filtration * 10)

    def _candidates(self, x: float, y: float) -> list[str]:
        kx, ky = round(x * 10), round(y * 10)
        found: list[str] = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for cid in self.by_pos.get((kx + dx, ky + dy), ()):
                    cx, cy = (kx + dx) / 10, (ky + dy) / 10
                    if abs(cx - x) <= 0.051 and abs(cy - y) <= 0.051:
                        found.append(cid)
        return found

    def resolve(self, x: float, y: float, doc_index: int, role: str,
                line: int) -> str:
        """Resolve a raw endpoint to the class drawn at that position."""
        cands = self._candidates(x, y)
        if not cands:
            raise DanglingEdgeError(
                f"no class at ({x},{y}) for a {role} endpoint", line
            )
        if len(cands) > 1:
            raise DanglingEdgeError(
                f"{len(cands)} classes within reach of ({x},{y})", line
            )
        return cands[0]

    # -- towers -------------------------------------------------------

    def collect_towers(self) -> None:
        for i, p in enumerate(self.prims):
            if p.kind != "arrow_line":
                continue
            sem = semantics(p.color, p.linestyle, self.profile, primitive="arrow")
            if sem.category != "tower":
                continue
            (x1, y1), (x2, y2) = p.points
            dx, dy = x2 - x1, y2 - y1
            if sem.tower_kind == "by_slope":
                kind = "h0_tower" if abs(dx) < 1e-9 else "h1_tower"
            else:
                kind = sem.tower_kind
            step = tower_step(kind)
            if abs(dx - 0.7 * step[0]) > 0.01 or abs(dy - 0.7 * step[1]) > 0.01:
                raise ParseError(
                    f"tower arrow at ({x1},{y1}) has direction ({dx},{dy})", p.line
                )
            base = self.resolve(x1, y1, i, "source", p.line)
            annihilated = (
                kind == "h1_tower" and self.profile.variant == "motivic"
            ) or self.profile.variant == "cofiber_tau"
            self.towers.append(
                TowerArrow(kind=kind, base=base, tau_annihilated=annihilated)
            )
            self.tower_bases.add(base)

    def _member_maps_out(self, cid: str) -> bool:
        """Whether the closure of the drawn differentials along towers
        gives this class (drawn, or the k-th member above a tower base) a
        nonzero differential of its own."""
        base_id, k = split_tower_ref(cid)
        if base_id is None:
            base_id, k = cid, 0
        tower = next((t for t in self.towers if t.base == base_id), None)
        edges = [
            e for e in self.diff_edges
            if e.source == base_id and not e.uncertain
        ]
        if k == 0 or tower is None:
            return bool(edges)
        kind = "h0" if tower.kind == "h0_tower" else "h1"
        struct_next = {}
        for e in self.struct_edges:
            struct_next.setdefault((e.kind, e.source), e.target)
        for e in edges:
            # the base's target continues along a tower of the same kind,
            # or along drawn multiplication lines, far enough to reach k
            t_base, _ = split_tower_ref(e.target)
            for b in (e.target, t_base):
                if b is not None and any(
                    t.base == b and t.kind == tower.kind for t in self.towers
                ):
                    return True
            cur = e.target
            steps = 0
            while steps < k:
                cur = struct_next.get((kind, cur))
                if cur is None:
                    break
                steps += 1
            if steps == k:
                return True
        return False

    def tower_members_at(self, stem: int, f: int) -> list[tuple[int, str]]:
        """Tower members sitting at a bidegree, with their height above
        the base, across all towers."""
        hits = []
        for t in self.towers:
            base = self.node_by_id[t.base]
            ds, _ = tower_step(t.kind)  # both tower kinds climb one filtration
            k = f - base.filtration
            if k >= 1 and base.stem + k * ds == stem:
                hits.append((k, tower_member_id(t.base, k)))
        return sorted(hits)

    # -- edges --------------------------------------------------------

    def collect_edges(self) -> None:
        arrows = []
        for i, p in enumerate(self.prims):
            if p.kind in ("line", "arrow_line") and p.points[0] == p.points[1]:
                # the corpus contains one zero-length stroke; it draws nothing
                self.notes.append(f"line {p.line}: degenerate zero-length line")
                continue
            if p.kind == "line" and p.macro:
                self.add_extension(i, p, (p.points[0], p.points[1]))
            elif p.kind == "curve":
                self.add_extension(i, p, (p.points[0], p.points[3]))
            elif p.kind == "line":
                sem = semantics(p.color, p.linestyle, self.profile)
                if sem.category == "diff":
                    self.add_diff_line(i, p, sem)
                else:
                    self.add_struct(i, p, sem)
            elif p.kind == "arrow_line":
                sem = semantics(p.color, p.linestyle, self.profile,
                                primitive="arrow")
                if sem.category == "diff":
                    arrows.append((i, p, sem))
        # arrows resolve after the full lines: coincident towers are told
        # apart by which one still supports a differential of its own
        for i, p, sem in arrows:
            self.add_diff_arrow(i, p, sem)

    def add_struct(self, i: int, p: Primitive, sem: Semantic) -> None:
        (x1, y1), (x2, y2) = p.points
        src = self.resolve(x1, y1, i, "source", p.line)
        dst = self.resolve(x2, y2, i, "target", p.line)
        a, b = self.node_by_id[src], self.node_by_id[dst]
        shift = (b.stem - a.stem, b.filtration - a.filtration)
        kind = {(0, 1): "h0", (1, 1): "h1", (3, 1): "h2"}.get(shift)
        if kind is None:
            raise ParseError(
                f"multiplication line ({x1},{y1})-({x2},{y2}) has shift {shift}",
                p.line,
            )
        if sem.struct.kind is not None and sem.struct.kind != kind:
            raise ParseError(
                f"{p.color} line should be {sem.struct.kind} but has shift {shift}",
                p.line,
            )
        self.struct_edges.append(
            StructEdge(
                kind=kind,
                source=src,
                target=dst,
                tau_power=sem.struct.tau_power,
                may_hidden=sem.may_hidden,
                uncertain=sem.uncertain,
                provenance=sem.struct.provenance,
            )
        )

    def _diff_power(self, sem: Semantic, stem: int, f: int) -> int:
        power = sem.diff.tau_power
        if power >= 2:
            power = self.profile.diff_power_overrides.get((stem, f), power)
        return power

    def _check_page(self, page: int, sem: Semantic, p: Primitive) -> None:
        if page not in sem.diff.pages:
            raise ParseError(
                f"{p.color} differential of page {page} not in {sorted(sem.diff.pages)}",
                p.line,
            )
        allowed = (
            self.profile.dashed_diff_pages
            if sem.uncertain
            else self.profile.solid_diff_pages
        )
        if page not in allowed:
            style = "dashed" if sem.uncertain else "solid"
            raise ParseError(
                f"{style} d{page} is not drawn on this chart", p.line
            )

    def add_diff_line(self, i: int, p: Primitive, sem: Semantic) -> None:
        (x1, y1), (x2, y2) = p.points
        src = self.resolve(x1, y1, i, "source", p.line)
        dst = self.resolve(x2, y2, i, "target", p.line)
        a, b = self.node_by_id[src], self.node_by_id[dst]
        if b.stem - a.stem != -1:
            raise ParseError(
                f"differential ({x1},{y1})-({x2},{y2}) moves {b.stem - a.stem} stems",
                p.line,
            )
        page = b.filtration - a.filtration
        self._check_page(page, sem, p)
        self.diff_edges.append(
            DiffEdge(
                page=page,
                source=src,
                target=dst,
                tau_power=self._diff_power(sem, a.stem, a.filtration),
                uncertain=sem.uncertain,
            )
        )

    def add_diff_arrow(self, i: int, p: Primitive, sem: Semantic) -> None:
        """A truncated differential arrow: it points at a tower member."""
        (x1, y1), (x2, y2) = p.points
        dx, dy = x2 - x1, y2 - y1
        if dx >= 0 or abs(dy / -dx - round(dy / -dx)) > 1e-6:
            raise ParseError(
                f"differential arrow at ({x1},{y1}) has direction ({dx},{dy})",
                p.line,
            )
        page = round(dy / -dx)
        self._check_page(page, sem, p)
        src = self.resolve(x1, y1, i, "source", p.line)
        a = self.node_by_id[src]
        power = self._diff_power(sem, a.stem, a.filtration)
        ts, tf = a.stem - 1, a.filtration + page
        # candidates on tower lines through the target bidegree: a drawn
        # base counts with distance 0, members of other towers with their
        # distance above the base
        hits = [
            (0, c.id) for c in self.classes
            if c.bidegree == (ts, tf) and c.id in self.tower_bases
        ]
        hits += self.tower_members_at(ts, tf)
        if len(hits) > 1 and a.tau_order is not None:
            # a torsion source can only map to torsion the source order
            # plus the coefficient power can annihilate
            def order_of(cid: str) -> Optional[int]:
                if cid in self.node_by_id:
                    return self.node_by_id[cid].tau_order
                return 1  # tower members above an h1 arrow
            defined = [
                (k, cid) for k, cid in hits
                if order_of(cid) is not None
                and order_of(cid) <= a.tau_order + power
            ]
            hits = defined or hits
        if len(hits) > 1:
            # A drawn differential must land on a generator whose own
            # differential vanishes, or d.d would be forced nonzero; among
            # coincident tower lines keep the ones that do not map onward.
            clean = [
                (k, cid) for k, cid in hits if not self._member_maps_out(cid)
            ]
            hits = clean or hits
        if not hits:
            # the arrow may still point at a plain drawn class there
            hits = [(0, c.id) for c in self.classes if c.bidegree == (ts, tf)]
        if not hits:
            raise DanglingEdgeError(
                f"differential arrow from ({x1},{y1}) hits no class or tower"
                f" at ({ts},{tf})",
                p.line,
            )
        dst = sorted(hits)[0][1]
        self.diff_edges.append(
            DiffEdge(
                page=page,
                source=src,
                target=dst,
                tau_power=power,
                uncertain=sem.uncertain,
            )
        )

    def add_extension(self, i: int, p: Primitive, ends) -> None:
        if p.macro not in self.profile.extensions:
            raise ParseError(
                f"{p.macro} extension not in the {self.profile.tag} legend", p.line
            )
        (x1, y1), (x2, y2) = ends
        src = self.resolve(x1, y1, i, "source", p.line)
        dst = self.resolve(x2, y2, i, "target", p.line)
        self.extension_edges.append(
            ExtensionEdge(
                kind=p.macro, source=src, target=dst,
                uncertain=p.linestyle == "dashed",
            )
        )

    # -- odds and ends --------------------------------------------------

    def check_decorations(self) -> None:
        for p in self.prims:
            if p.kind == "grid":
                for x, y in p.points:
                    if not (-1 <= x <= MAX_STEM and -1 <= y <= MAX_FILTRATION):
                        raise ParseError(f"grid reaches ({x},{y})", p.line)
            elif p.kind == "label" and p.macro == "rput":
                x, y = p.points[0]
                if not (-1 <= x <= MAX_STEM and -1 <= y <= MAX_FILTRATION):
                    raise ParseError(f"axis numeral at ({x},{y})", p.line)
            elif p.kind == "label" and p.macro == "title":
                got = _normalize_title(p.text or "")
                want = re.sub(r"\s+", " ", self.profile.title)
                if got != want:
                    raise ParseError(
                        f"block titled {got!r} does not match the"
                        f" {self.profile.tag} section", p.line
                    )

    def build(self) -> ChartPage:
        self.check_decorations()
        self.collect_classes()
        self.collect_towers()
        self.collect_edges()
        return ChartPage(
            variant=self.profile.variant,
            page=self.profile.page,
            windows=self.profile.windows,
            classes=tuple(sorted(self.classes, key=ClassNode.sort_key)),
            struct_edges=tuple(sorted(self.struct_edges, key=StructEdge.sort_key)),
            diff_edges=tuple(sorted(self.diff_edges, key=DiffEdge.sort_key)),
            extension_edges=tuple(
                sorted(self.extension_edges, key=ExtensionEdge.sort_key)
            ),
            towers=tuple(sorted(self.towers, key=TowerArrow.sort_key)),
        )


def assemble(
    primitives: list[Primitive],
    profile: LegendProfile,
    notes: Optional[list[str]] = None,
) -> ChartPage:
    """Interpret one block's primitives under its legend profile.

    Anomalies that were handled rather than fatal (a zero-length stroke, a
    marker drawn twice) are appended to notes when a list is given.
    """
    worker = _Assembler(primitives, profile)
    chart = worker.build()
    if notes is not None:
        notes.extend(f"{profile.chart_id}: {n}" for n in worker.notes)
    return chart


def extract_document(
    document: str, notes: Optional[list[str]] = None
) -> list[ChartPage]:
    """Parse every chart block of a source document."""
    charts = []
    for block in scan_blocks(document):
        profile = BY_TAG.get(block.tag)
        if profile is None:
            raise ParseError(f"no legend profile for section {block.tag!r}")
        prims = parse_commands(block.text, block.first_line)
        charts.append(assemble(prims, profile, notes))
    return charts
