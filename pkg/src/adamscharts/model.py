"""Typed chart data model: classes, edges, towers, pages, and bidegree laws.

Coordinates follow the printed convention: ``stem`` is the horizontal axis,
``filtration`` the vertical one.  Classes coinciding in a bidegree are told
apart by a draw offset ("nudge") measured in tenths of a grid unit, and, for
the rare spots where the source piles several markers on the same offset, by
an occurrence index ``dup``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from typing import Mapping, Optional


class ChartError(Exception):
    """Base class for all chart-toolkit errors."""


class InvalidPageError(ChartError):
    pass


class UnknownKindError(ChartError):
    pass


class InvalidCapError(ChartError):
    pass


VARIANTS = ("classical", "motivic", "cofiber_tau")
PAGES = ("cohomology", "E2", "E3", "E4", "Einf")
STRUCT_KINDS = ("h0", "h1", "h2")
EXTENSION_KINDS = ("two", "eta", "nu", "tau")
TOWER_KINDS = ("h0_tower", "h1_tower")
PROVENANCES = ("none", "bottom_cell", "top_cell", "hidden")

# Tau orders: None means a free module (a full copy of F2[tau]); an integer k
# means the cyclic torsion module F2[tau]/tau^k.
FREE = None

MAX_STEM = 70
MAX_FILTRATION = 36


def diff_shift(page: int) -> tuple[int, int]:
    """Bidegree shift of the page-r differential: one stem back, r up."""
    if not 2 <= page <= 5:
        raise InvalidPageError(f"differential page must be 2..5, got {page}")
    return (-1, page)


def struct_shift(kind: str) -> tuple[int, Optional[int]]:
    """Bidegree shift of a multiplication or extension edge.

    For the hidden-extension kinds the filtration jump is not fixed; the
    second component is then None, meaning "any positive amount".
    """
    shifts = {
        "h0": (0, 1),
        "h1": (1, 1),
        "h2": (3, 1),
        "two": (0, None),
        "eta": (1, None),
        "nu": (3, None),
        "tau": (0, None),
    }
    try:
        return shifts[kind]
    except KeyError:
        raise UnknownKindError(f"unknown edge kind {kind!r}") from None


def class_id(stem: int, filtration: int, nudge: int, dup: int = 0) -> str:
    base = f"{stem}:{filtration}:{nudge:+d}"
    return f"{base}:{dup}" if dup else base


@dataclass(frozen=True)
class ClassNode:
    """A single dot or square of a chart.

    ``nudge`` is the signed draw offset in tenths of a unit; ``dup``
    disambiguates markers piled on the very same offset.  ``tau_order`` is
    None for a free module and 1..4 for tau-torsion.  ``origin_tower`` names
    the tower arrow a materialized class was generated from (empty for drawn
    classes).
    """

    stem: int
    filtration: int
    nudge: int = 0
    tau_order: Optional[int] = FREE
    name: Optional[str] = None
    label_angle: Optional[int] = None
    hidden_tau_marker: bool = False
    provenance: str = "none"
    dup: int = 0
    origin_tower: str = ""

    @property
    def id(self) -> str:
        if self.origin_tower:
            return self.origin_tower
        return class_id(self.stem, self.filtration, self.nudge, self.dup)

    @property
    def bidegree(self) -> tuple[int, int]:
        return (self.stem, self.filtration)

    def sort_key(self) -> tuple:
        return (self.stem, self.filtration, self.nudge, self.dup, self.origin_tower)


@dataclass(frozen=True)
class StructEdge:
    """An h0/h1/h2 multiplication line.

    ``tau_power`` p > 0 records that the product hits tau^p times the target
    generator.  ``provenance`` tracks the cofiber-of-tau line coloring
    (bottom cell / top cell / detected by neither).
    """

    kind: str
    source: str
    target: str
    tau_power: int = 0
    may_hidden: bool = False
    uncertain: bool = False
    provenance: str = "none"

    def sort_key(self) -> tuple:
        return ("struct", self.kind, self.source, self.target, self.tau_power)


@dataclass(frozen=True)
class DiffEdge:
    """A d_r differential from source to tau^tau_power times the target."""

    page: int
    source: str
    target: str
    tau_power: int = 0
    uncertain: bool = False

    def sort_key(self) -> tuple:
        return ("diff", self.page, self.source, self.target, self.tau_power)


@dataclass(frozen=True)
class ExtensionEdge:
    """A hidden 2/eta/nu extension, or a tau extension on motivic pages."""

    kind: str
    source: str
    target: str
    uncertain: bool = False

    def sort_key(self) -> tuple:
        return ("ext", self.kind, self.source, self.target)


@dataclass(frozen=True)
class TowerArrow:
    """An arrow marking an infinite h0 or h1 tower above its base class."""

    kind: str
    base: str
    tau_annihilated: bool = False

    def sort_key(self) -> tuple:
        return ("tower", self.kind, self.base)


@dataclass(frozen=True)
class CompletenessWindow:
    feature: str  # classes | d2 | d3 | d4 | d5 | hidden_extensions
    max_stem: int


@dataclass(frozen=True)
class ChartPage:
    """One published chart: a variant/page pair with all its content.

    Immutable after construction; derived lookups are cached.  Edge
    endpoints are class ids; an id of the form ``<base>^k`` refers to the
    k-th element above a tower arrow based at ``<base>`` and is considered
    valid as long as that tower exists (materialize_towers creates the
    actual node under the same id).
    """

    variant: str
    page: str
    windows: tuple[CompletenessWindow, ...] = ()
    classes: tuple[ClassNode, ...] = ()
    struct_edges: tuple[StructEdge, ...] = ()
    diff_edges: tuple[DiffEdge, ...] = ()
    extension_edges: tuple[ExtensionEdge, ...] = ()
    towers: tuple[TowerArrow, ...] = ()

    @property
    def chart_id(self) -> str:
        return f"{self.variant}-{self.page}"

    @cached_property
    def by_id(self) -> Mapping[str, ClassNode]:
        index: dict[str, ClassNode] = {}
        for c in self.classes:
            if c.id in index:
                raise ChartError(f"duplicate class id {c.id} in {self.chart_id}")
            index[c.id] = c
        return index

    @cached_property
    def towers_by_base(self) -> Mapping[str, TowerArrow]:
        return {t.base: t for t in self.towers}

    def window(self, feature: str) -> Optional[int]:
        for w in self.windows:
            if w.feature == feature:
                return w.max_stem
        return None

    def position(self, cid: str) -> tuple[int, int, int]:
        """(stem, filtration, nudge) for a class id, resolving tower refs."""
        node = self.by_id.get(cid)
        if node is not None:
            return (node.stem, node.filtration, node.nudge)
        base_id, k = split_tower_ref(cid)
        if base_id is not None:
            base = self.by_id.get(base_id)
            tower = self.towers_by_base.get(base_id)
            if base is not None and tower is not None:
                ds, df = tower_step(tower.kind)
                return (base.stem + k * ds, base.filtration + k * df, base.nudge)
        raise ChartError(f"unresolved class id {cid} in {self.chart_id}")

    def has_ref(self, cid: str) -> bool:
        try:
            self.position(cid)
        except ChartError:
            return False
        return True


def tower_step(kind: str) -> tuple[int, int]:
    if kind == "h0_tower":
        return (0, 1)
    if kind == "h1_tower":
        return (1, 1)
    raise UnknownKindError(f"unknown tower kind {kind!r}")


def split_tower_ref(cid: str) -> tuple[Optional[str], int]:
    """Split ``<base>^k`` into (base, k); (None, 0) when not a tower ref."""
    if "^" not in cid:
        return (None, 0)
    base, _, tail = cid.rpartition("^")
    if base and tail.isdigit() and int(tail) >= 1:
        return (base, int(tail))
    return (None, 0)


def tower_member_id(base_id: str, k: int) -> str:
    return f"{base_id}^{k}"


def tower_classes(chart: ChartPage, tower: TowerArrow, f_cap: int) -> list[ClassNode]:
    """The classes a tower arrow generates up to the filtration cap."""
    base = chart.by_id[tower.base]
    ds, df = tower_step(tower.kind)
    order = 1 if tower.kind == "h1_tower" else base.tau_order
    out = []
    k = 1
    while base.filtration + k * df <= f_cap:
        out.append(
            ClassNode(
                stem=base.stem + k * ds,
                filtration=base.filtration + k * df,
                nudge=base.nudge,
                tau_order=order,
                provenance=base.provenance,
                origin_tower=tower_member_id(tower.base, k),
            )
        )
        k += 1
    return out


def materialize_towers(chart: ChartPage, f_cap: int = MAX_FILTRATION) -> ChartPage:
    """Append the classes implied by tower arrows, up to filtration f_cap.

    New classes sit above each arrow's base with the base's nudge; h1-tower
    members are tau-torsion of order one, h0-tower members inherit the
    base's order.  Connecting edges of the matching kind are appended.
    Idempotent for a fixed cap and monotone in the cap; drawn content is
    left untouched.  The default cap is the drawn grid height.
    """
    drawn_max = max((c.filtration for c in chart.classes), default=0)
    if f_cap < drawn_max:
        raise InvalidCapError(
            f"f_cap {f_cap} below drawn filtration {drawn_max} in {chart.chart_id}"
        )
    known = set(chart.by_id)
    new_classes: list[ClassNode] = []
    new_edges: list[StructEdge] = []
    for tower in chart.towers:
        members = tower_classes(chart, tower, f_cap)
        kind = "h0" if tower.kind == "h0_tower" else "h1"
        prev = tower.base
        base = chart.by_id[tower.base]
        for node in members:
            if node.id not in known:
                known.add(node.id)
                new_classes.append(node)
                new_edges.append(
                    StructEdge(kind=kind, source=prev, target=node.id,
                               provenance=base.provenance)
                )
            prev = node.id
    if not new_classes:
        return chart
    return replace(
        chart,
        classes=chart.classes + tuple(new_classes),
        struct_edges=chart.struct_edges + tuple(new_edges),
    )


def restrict(chart: ChartPage, max_stem: int) -> ChartPage:
    """The part of a chart in stems 0..max_stem.

    Edges survive when both endpoints do; windows are clamped.
    """
    keep = {c.id for c in chart.classes if c.stem <= max_stem}

    def ok(cid: str) -> bool:
        if cid in keep:
            return True
        base_id, _ = split_tower_ref(cid)
        return base_id in keep

    return replace(
        chart,
        windows=tuple(
            CompletenessWindow(w.feature, min(w.max_stem, max_stem))
            for w in chart.windows
        ),
        classes=tuple(c for c in chart.classes if c.id in keep),
        struct_edges=tuple(
            e for e in chart.struct_edges if ok(e.source) and ok(e.target)
        ),
        diff_edges=tuple(
            e for e in chart.diff_edges if ok(e.source) and ok(e.target)
        ),
        extension_edges=tuple(
            e for e in chart.extension_edges if ok(e.source) and ok(e.target)
        ),
        towers=tuple(t for t in chart.towers if t.base in keep),
    )


def check_edge_shifts(chart: ChartPage) -> list[str]:
    """Exact bidegree-law check for every edge; returns human messages.

    Differentials must shift by (-1, +page); multiplications by their fixed
    slope; hidden extensions by their stem shift with a strictly positive
    filtration jump.  Used by the validator and by tests.
    """
    problems = []
    for e in chart.diff_edges:
        s1, f1, _ = chart.position(e.source)
        s2, f2, _ = chart.position(e.target)
        if (s2 - s1, f2 - f1) != diff_shift(e.page):
            problems.append(
                f"d{e.page} {e.source}->{e.target} shifts by ({s2 - s1},{f2 - f1})"
            )
    for e in chart.struct_edges:
        s1, f1, _ = chart.position(e.source)
        s2, f2, _ = chart.position(e.target)
        if (s2 - s1, f2 - f1) != struct_shift(e.kind):
            problems.append(
                f"{e.kind} {e.source}->{e.target} shifts by ({s2 - s1},{f2 - f1})"
            )
    for e in chart.extension_edges:
        s1, f1, _ = chart.position(e.source)
        s2, f2, _ = chart.position(e.target)
        dstem, _ = struct_shift(e.kind)
        if s2 - s1 != dstem or f2 - f1 < 1:
            problems.append(
                f"{e.kind} extension {e.source}->{e.target} shifts by ({s2 - s1},{f2 - f1})"
            )
    return problems
