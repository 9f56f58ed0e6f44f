"""Legend-level laws: structural validation, the Leibniz audit, and the
cofiber-of-tau cell-count identity.

Laws quoted from chart legends validate at error severity; inferred laws
(differential source/target overlap, the Leibniz rule) report at warning
level or as audit verdicts, so an inference can never block ingestion of
published data.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional

from .model import (
    ChartError,
    ChartPage,
    diff_shift,
    materialize_towers,
    split_tower_ref,
    struct_shift,
)
from .taualgebra import tau_power

RULES = {
    "diff-shift": "differential bidegree law (-1, +page)",
    "struct-shift": "multiplication bidegree law",
    "ext-shift": "extension stem shift with positive filtration jump",
    "edge-ref": "edge endpoints must reference existing classes",
    "tau-power-variant": "tau-power coefficients only on motivic variants",
    "tau-coherence": "a tau^p coefficient needs p below the target order",
    "hidden-tau-variant": "hidden-tau squares only on motivic variants",
    "provenance-variant": "cell provenance exactly on cofiber-of-tau charts",
    "ext-kind-variant": "extension kinds match the chart variant and page",
    "tower-annihilated": "motivic h1 towers are tau-annihilated",
    "dr-overlap": "page-r sources and targets should not meet",
    "ctau-total": "cofiber class count equals sphere summands plus shifted torsion",
    "ctau-bottom": "bottom-cell count equals sphere summand count",
    "ctau-top": "top-cell count equals shifted sphere torsion count",
}


@dataclass(frozen=True)
class Finding:
    rule: str
    severity: str  # error | warning | info
    chart: str
    location: str
    message: str

    def render(self) -> str:
        return f"{self.severity} {self.rule} {self.chart} {self.location}: {self.message}"

    def record(self) -> str:
        return f"finding {self.severity} {self.rule} {self.chart} {self.location}"


class ConfigurationError(ChartError):
    pass


def _pos(chart: ChartPage, cid: str) -> str:
    s, f, _ = chart.position(cid)
    return f"({s},{f})"


def validate_structure(chart: ChartPage) -> list[Finding]:
    """Check every legend-level law on one chart; findings, not raises."""
    out: list[Finding] = []

    def finding(rule: str, severity: str, location: str, message: str) -> None:
        out.append(Finding(rule, severity, chart.chart_id, location, message))

    motivic = chart.variant == "motivic"
    ctau = chart.variant == "cofiber_tau"

    for c in chart.classes:
        if c.hidden_tau_marker and not motivic:
            finding("hidden-tau-variant", "error", f"({c.stem},{c.filtration})",
                    "square drawn outside a motivic chart")
        if (c.provenance != "none") != ctau:
            finding("provenance-variant", "error", f"({c.stem},{c.filtration})",
                    f"provenance {c.provenance} on a {chart.variant} chart")
        if chart.variant != "motivic" and c.tau_order not in (None, 1):
            finding("tau-coherence", "error", f"({c.stem},{c.filtration})",
                    f"tau order {c.tau_order} outside the motivic legend")

    for e in chart.diff_edges + chart.struct_edges + chart.extension_edges:
        for endpoint in (e.source, e.target):
            if not chart.has_ref(endpoint):
                finding("edge-ref", "error", endpoint, "unresolved endpoint")
                break
        else:
            continue
        return out  # positions below would raise

    for e in chart.diff_edges:
        s1, f1, _ = chart.position(e.source)
        s2, f2, _ = chart.position(e.target)
        if (s2 - s1, f2 - f1) != diff_shift(e.page):
            finding("diff-shift", "error", f"({s1},{f1})",
                    f"d{e.page} shifts by ({s2 - s1},{f2 - f1})")
        if e.tau_power and chart.variant == "classical":
            finding("tau-power-variant", "error", f"({s1},{f1})",
                    f"tau^{e.tau_power} differential on a classical chart")
        torder = _order_of(chart, e.target)
        if torder is not None and e.tau_power >= torder:
            finding("tau-coherence", "error", f"({s1},{f1})",
                    f"tau^{e.tau_power} into a tau^{torder}-torsion class")

    for e in chart.struct_edges:
        s1, f1, _ = chart.position(e.source)
        s2, f2, _ = chart.position(e.target)
        if (s2 - s1, f2 - f1) != struct_shift(e.kind):
            finding("struct-shift", "error", f"({s1},{f1})",
                    f"{e.kind} shifts by ({s2 - s1},{f2 - f1})")
        if e.tau_power and chart.variant == "classical":
            finding("tau-power-variant", "error", f"({s1},{f1})",
                    f"tau^{e.tau_power} product on a classical chart")
        torder = _order_of(chart, e.target)
        if torder is not None and e.tau_power >= torder:
            finding("tau-coherence", "error", f"({s1},{f1})",
                    f"tau^{e.tau_power} into a tau^{torder}-torsion class")

    for e in chart.extension_edges:
        s1, f1, _ = chart.position(e.source)
        s2, f2, _ = chart.position(e.target)
        dstem, _ = struct_shift(e.kind)
        if s2 - s1 != dstem or f2 - f1 < 1:
            finding("ext-shift", "error", f"({s1},{f1})",
                    f"{e.kind} extension shifts by ({s2 - s1},{f2 - f1})")
        if e.kind == "tau" and chart.variant != "motivic":
            finding("ext-kind-variant", "error", f"({s1},{f1})",
                    "tau extension outside a motivic chart")
        if e.kind in ("two", "eta", "nu") and chart.page != "Einf":
            finding("ext-kind-variant", "error", f"({s1},{f1})",
                    f"hidden {e.kind} extension on a {chart.page} chart")

    for t in chart.towers:
        if t.kind == "h1_tower" and motivic and not t.tau_annihilated:
            finding("tower-annihilated", "error", _pos(chart, t.base),
                    "motivic h1 tower not marked tau-annihilated")

    by_page_src: dict[int, set] = {}
    by_page_tgt: dict[int, set] = {}
    for e in chart.diff_edges:
        if e.uncertain:
            continue
        by_page_src.setdefault(e.page, set()).add(e.source)
        by_page_tgt.setdefault(e.page, set()).add(e.target)
    for page in by_page_src:
        overlap = by_page_src[page] & by_page_tgt.get(page, set())
        for cid in sorted(overlap):
            finding("dr-overlap", "warning", _pos(chart, cid),
                    f"class both sources and receives a d{page}")
    return sorted(out, key=lambda f: (f.rule, f.location, f.message))


def _order_of(chart: ChartPage, cid: str) -> Optional[int]:
    node = chart.by_id.get(cid)
    if node is not None:
        return node.tau_order
    # a tower reference: h1 members are tau-torsion of order one, h0
    # members inherit the base
    base_id, _ = split_tower_ref(cid)
    base = chart.by_id[base_id]
    tower = chart.towers_by_base[base_id]
    return 1 if tower.kind == "h1_tower" else base.tau_order


@dataclass(frozen=True)
class LeibnizCase:
    """One testable instance of d(h.x) = h.d(x) on a chart."""

    x: str
    kind: str
    y: str  # the leading class of h.x
    z: str  # the leading class of d(x)
    verdict: str  # confirmed | violated | undetermined
    detail: str = ""


def _reduce_element(chart: ChartPage, coeffs: dict[str, int], alive) -> dict[str, int]:
    """Drop vanished coefficients: tau^p w dies for p at or above the
    torsion order, and classes gone on an earlier page contribute nothing
    to the page being audited."""
    out = {}
    for cid, poly in coeffs.items():
        if not alive(cid):
            continue
        order = _order_of(chart, cid)
        if order is not None:
            poly &= (1 << order) - 1
        if poly:
            out[cid] = poly
    return out


def _collapse(chart: ChartPage, coeffs: dict[str, int]):
    """Coefficients by bidegree, forgetting which coincident class."""
    out: dict[tuple[int, int], list[int]] = {}
    for cid, poly in coeffs.items():
        out.setdefault(chart.position(cid)[:2], []).append(poly)
    return {k: sorted(v) for k, v in out.items()}


def leibniz_audit(chart: ChartPage) -> list[LeibnizCase]:
    """Check d(h.x) = h.d(x) wherever the chart draws the needed edges.

    Multiplications are drawn completely on these charts and
    differentials are complete within their windows, so both sides of the
    rule are determined sums over drawn edges.  A case is undetermined
    when a leg leaves the drawn region (a tower member) or when either
    class dies on an earlier page; coincident classes in one bidegree are
    compared up to the basis freedom the drawing cannot express.
    """
    struct_from: dict[tuple[str, str], list] = {}
    for e in chart.struct_edges:
        if not e.uncertain:
            struct_from.setdefault((e.kind, e.source), []).append(e)
    diff_from: dict[tuple[int, str], list] = {}
    dies_at: dict[str, int] = {}
    for e in chart.diff_edges:
        if e.uncertain:
            continue
        diff_from.setdefault((e.page, e.source), []).append(e)
        for cid in (e.source, e.target):
            dies_at[cid] = min(dies_at.get(cid, 99), e.page)

    def alive(cid: str, page: int) -> bool:
        return dies_at.get(cid, 99) >= page

    cases: list[LeibnizCase] = []
    for (kind, x), h_edges in sorted(struct_from.items()):
        for page in (2, 3, 4, 5):
            d_edges = diff_from.get((page, x))
            if not d_edges:
                continue
            # the rule applies on the page where d acts: x and h.x must
            # still be alive there
            if not alive(x, page) or any(not alive(e.target, page) for e in h_edges):
                continue
            y = h_edges[0].target
            z = d_edges[0].target
            undetermined = None
            lhs: dict[str, int] = {}
            for he in h_edges:
                for de in diff_from.get((page, he.target), ()):
                    lhs[de.target] = lhs.get(de.target, 0) ^ tau_power(
                        he.tau_power + de.tau_power
                    )
            rhs: dict[str, int] = {}
            for de in d_edges:
                if de.target not in chart.by_id:
                    undetermined = f"d{page}(x) lands in a tower"
                    break
                for he in struct_from.get((kind, de.target), ()):
                    rhs[he.target] = rhs.get(he.target, 0) ^ tau_power(
                        de.tau_power + he.tau_power
                    )
            if undetermined is None and any(
                cid not in chart.by_id for cid in lhs
            ):
                undetermined = f"d{page}({kind}.x) lands in a tower"
            if undetermined is not None:
                cases.append(LeibnizCase(x, kind, y, z, "undetermined", undetermined))
                continue
            lhs = _reduce_element(chart, lhs, lambda cid: alive(cid, page))
            rhs = _reduce_element(chart, rhs, lambda cid: alive(cid, page))
            if lhs == rhs:
                cases.append(LeibnizCase(x, kind, y, z, "confirmed", ""))
            elif _collapse(chart, lhs) == _collapse(chart, rhs):
                cases.append(
                    LeibnizCase(x, kind, y, z, "confirmed",
                                "up to a basis change among coincident classes")
                )
            else:
                cases.append(
                    LeibnizCase(
                        x, kind, y, z, "violated",
                        f"d({kind}.x) = {sorted(lhs.items())} but"
                        f" {kind}.d(x) = {sorted(rhs.items())}",
                    )
                )
    return cases


def ctau_check(
    sphere: ChartPage,
    ctau: ChartPage,
    window: int,
    *,
    f_cap: int = 36,
    calibration_stems: int = 10,
) -> tuple[tuple[int, int], list[Finding]]:
    """Verify the cell-count identity linking a cofiber-of-tau chart to
    the sphere's chart.

    Every sphere summand contributes one bottom-cell class in the same
    bidegree; every tau-torsion sphere summand contributes one top-cell
    class shifted by the calibrated amount.  The shift is calibrated on
    the low stems and must be the unique one that fits; expected (+1,-1).
    """
    sphere_mat = materialize_towers(sphere, f_cap + 2)
    ctau_mat = materialize_towers(ctau, f_cap)
    sphere_all: Counter = Counter()
    sphere_torsion: Counter = Counter()
    for c in sphere_mat.classes:
        sphere_all[c.bidegree] += 1
        if c.tau_order is not None:
            sphere_torsion[c.bidegree] += 1
    total: Counter = Counter()
    bottom: Counter = Counter()
    top: Counter = Counter()
    for c in ctau_mat.classes:
        total[c.bidegree] += 1
        if c.provenance == "bottom_cell":
            bottom[c.bidegree] += 1
        elif c.provenance == "top_cell":
            top[c.bidegree] += 1

    def mismatches(shift: tuple[int, int], max_stem: int) -> list[Finding]:
        found = []
        support = set(total)
        support.update(
            (s + shift[0], f + shift[1]) for (s, f) in sphere_torsion
        )
        support.update(sphere_all)
        for s, f in sorted(support):
            if not (0 <= s <= max_stem and 0 <= f <= f_cap):
                continue
            want_bottom = sphere_all.get((s, f), 0)
            want_top = sphere_torsion.get((s - shift[0], f - shift[1]), 0)
            loc = f"({s},{f})"
            if bottom.get((s, f), 0) != want_bottom:
                found.append(Finding(
                    "ctau-bottom", "error", ctau.chart_id, loc,
                    f"bottom {bottom.get((s, f), 0)} != sphere {want_bottom}",
                ))
            if top.get((s, f), 0) != want_top:
                found.append(Finding(
                    "ctau-top", "error", ctau.chart_id, loc,
                    f"top {top.get((s, f), 0)} != shifted torsion {want_top}",
                ))
            if total.get((s, f), 0) != want_bottom + want_top:
                found.append(Finding(
                    "ctau-total", "error", ctau.chart_id, loc,
                    f"{total.get((s, f), 0)} classes != {want_bottom}+{want_top}",
                ))
        return found

    fits = []
    for ds in (-2, -1, 0, 1, 2):
        for df in (-2, -1, 0, 1, 2):
            if not mismatches((ds, df), calibration_stems):
                fits.append((ds, df))
    if len(fits) != 1:
        raise ConfigurationError(
            f"top-cell shift calibration found {len(fits)} candidates: {fits}"
        )
    shift = fits[0]
    return shift, mismatches(shift, window)
