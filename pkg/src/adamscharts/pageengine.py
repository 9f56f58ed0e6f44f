"""Page turning: compute the next page of a chart and diff it against the
published one.

The computation works per bidegree on the materialized chart (towers
expanded to a filtration cap).  Differentials drawn on tower bases are
first closed up along the towers: a differential commutes with the h0/h1
multiplications, so an edge from a tower base propagates to every member
above it, landing one step higher in the target's tower (or along the
target's drawn multiplication chain).  Without this closure the infinite
families would falsely survive.

Bidegrees whose computation would need data from outside the chart's
windows, or from above the filtration cap, are marked indeterminate and
skipped by the comparison rather than reported as mismatches.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .model import (
    ChartError,
    ChartPage,
    ClassNode,
    DiffEdge,
    MAX_FILTRATION,
    MAX_STEM,
    materialize_towers,
    split_tower_ref,
    tower_member_id,
)
from .taualgebra import (
    CompositionError,
    PolyMatrix,
    column_basis,
    PresentedModule,
    UngradableError,
    is_tau_power,
    kernel,
    poly_deg,
    poly_mul,
    snf,
    solve,
    tau_power,
)

DEFAULT_F_CAP = MAX_FILTRATION

Bidegree = tuple[int, int]


def order_token(order: Optional[int]) -> str:
    return "free" if order is None else f"tau{order}"


def summand_tokens(orders: Iterable[Optional[int]]) -> str:
    counts = Counter(order_token(o) for o in orders)
    parts = []
    for token in sorted(counts, key=lambda t: (t != "free", t)):
        n = counts[token]
        parts.append(token if n == 1 else f"{n}x{token}")
    return "+".join(parts) if parts else "0"


@dataclass(frozen=True)
class BidegreeModule:
    """One bidegree of a materialized chart, ready for homology."""

    generators: tuple[str, ...]
    module: PresentedModule
    outgoing: PolyMatrix  # maps this bidegree into the stacked d_r targets
    incoming: PolyMatrix  # maps the stacked d_r sources into this bidegree
    target_orders: PresentedModule
    source_orders: PresentedModule
    edges: tuple[str, ...] = ()


def _propagated(chart: ChartPage, f_cap: int) -> list[DiffEdge]:
    """Close drawn differentials up along towers (Leibniz rule)."""
    struct_next: dict[tuple[str, str], str] = {}
    for e in chart.struct_edges:
        struct_next.setdefault((e.kind, e.source), e.target)
    out: list[DiffEdge] = []
    for e in chart.diff_edges:
        src_tower = chart.towers_by_base.get(e.source)
        if src_tower is None:
            continue
        kind = "h0" if src_tower.kind == "h0_tower" else "h1"
        # locate the target inside a tower of the same kind, if any
        tgt_base: Optional[str] = None
        offset = 0
        t_tower = chart.towers_by_base.get(e.target)
        if t_tower is not None and t_tower.kind == src_tower.kind:
            tgt_base, offset = e.target, 0
        else:
            base_id, k = split_tower_ref(e.target)
            if base_id is not None:
                t_tower = chart.towers_by_base.get(base_id)
                if t_tower is not None and t_tower.kind == src_tower.kind:
                    tgt_base, offset = base_id, k
        k = 1
        tgt_id = e.target
        while True:
            src_id = tower_member_id(e.source, k)
            if src_id not in chart.by_id:
                break
            if tgt_base is not None:
                tgt_id = tower_member_id(tgt_base, offset + k)
                if tgt_id not in chart.by_id:
                    break
            else:
                # follow the drawn multiplication chain from the target
                nxt = struct_next.get((kind, tgt_id))
                if nxt is None:
                    break
                tgt_id = nxt
            out.append(
                DiffEdge(
                    page=e.page,
                    source=src_id,
                    target=tgt_id,
                    tau_power=e.tau_power,
                    uncertain=e.uncertain,
                )
            )
            k += 1
    return out


def _bidegree_generators(chart: ChartPage) -> dict[Bidegree, list[ClassNode]]:
    groups: dict[Bidegree, list[ClassNode]] = {}
    for node in chart.classes:
        groups.setdefault(node.bidegree, []).append(node)
    for nodes in groups.values():
        nodes.sort(key=lambda n: (n.nudge, n.id))
    return groups


def _segment(
    chart: ChartPage,
    groups: Mapping[Bidegree, list[ClassNode]],
    edges: Sequence[DiffEdge],
    bidegree: Bidegree,
    pages: frozenset[int],
) -> BidegreeModule:
    """Assemble the middle module at one bidegree with its stacked maps."""
    stem, filt = bidegree
    mid = groups.get(bidegree, [])
    mid_ids = [n.id for n in mid]
    mid_index = {cid: i for i, cid in enumerate(mid_ids)}
    targets: list[ClassNode] = []
    sources: list[ClassNode] = []
    for r in sorted(pages):
        targets.extend(groups.get((stem - 1, filt + r), []))
        sources.extend(groups.get((stem + 1, filt - r), []))
    t_index = {n.id: i for i, n in enumerate(targets)}
    s_index = {n.id: i for i, n in enumerate(sources)}
    out_rows = [[0] * len(mid) for _ in targets]
    in_rows = [[0] * len(sources) for _ in mid]
    touched = []
    for e in edges:
        if e.source in mid_index and e.target in t_index:
            out_rows[t_index[e.target]][mid_index[e.source]] ^= tau_power(e.tau_power)
            touched.append(f"d{e.page} {e.source}->{e.target} tau^{e.tau_power}")
        if e.target in mid_index and e.source in s_index:
            in_rows[mid_index[e.target]][s_index[e.source]] ^= tau_power(e.tau_power)
            touched.append(f"d{e.page} {e.source}->{e.target} tau^{e.tau_power}")
    return BidegreeModule(
        generators=tuple(mid_ids),
        module=PresentedModule(tuple(n.tau_order for n in mid)),
        outgoing=PolyMatrix.from_rows(out_rows, len(mid)),
        incoming=PolyMatrix.from_rows(in_rows, len(sources)),
        target_orders=PresentedModule(tuple(n.tau_order for n in targets)),
        source_orders=PresentedModule(tuple(n.tau_order for n in sources)),
        edges=tuple(dict.fromkeys(touched)),
    )


def group_by_bidegree(chart: ChartPage, r: int) -> dict[Bidegree, BidegreeModule]:
    """Regroup a materialized chart around the page-r differential."""
    groups = _bidegree_generators(chart)
    edges = [e for e in chart.diff_edges if e.page == r]
    return {
        bid: _segment(chart, groups, edges, bid, frozenset({r}))
        for bid in groups
    }


@dataclass(frozen=True)
class ComputedPage:
    """Per-bidegree summand multisets of a freshly turned page."""

    pages: tuple[int, ...]
    summands: Mapping[Bidegree, tuple[Optional[int], ...]]
    indeterminate: frozenset[Bidegree]
    uncertain_touched: frozenset[Bidegree]
    edges_at: Mapping[Bidegree, tuple[str, ...]]


@dataclass
class _PageState:
    """A subquotient of one bidegree's original module.

    basis columns write the current generators in the original class
    coordinates; relations columns are relations among the current
    generators; zeros columns are original-coordinate vectors that have
    become zero on this page (original torsion plus accumulated
    boundaries).  Homology shrinks the basis and grows the relations, so
    a differential drawn on an original class can still be expressed on
    whatever survives of it.
    """

    ids: tuple[str, ...]
    basis: PolyMatrix
    relations: PolyMatrix
    zeros: PolyMatrix

    @staticmethod
    def initial(nodes: Sequence[ClassNode]) -> "_PageState":
        module = PresentedModule(tuple(n.tau_order for n in nodes))
        rel = module.relation_columns()
        return _PageState(
            ids=tuple(n.id for n in nodes),
            basis=PolyMatrix.identity(len(nodes)),
            relations=rel,
            zeros=rel,
        )

    def express(self, vectors: PolyMatrix) -> Optional[PolyMatrix]:
        """Write original-coordinate vectors in the current generators,
        modulo everything known to vanish; None if any falls outside."""
        block = self.basis.hstack(self.zeros)
        sol = solve(block, vectors)
        if sol is None:
            return None
        return PolyMatrix(
            self.basis.cols,
            vectors.cols,
            tuple(sol.cells[i] for i in range(self.basis.cols)),
        )

    def simplify(self, protected: frozenset[str]) -> "_PageState":
        """Eliminate generators a unit relation makes redundant.

        Classes that carry drawn differentials are kept as coordinates, so
        a later page's edges act on the representatives the chart drew.
        """
        basis = [list(self.basis.column(j)) for j in range(self.basis.cols)]
        rels = [list(self.relations.column(j)) for j in range(self.relations.cols)]
        zeros = [list(self.zeros.column(j)) for j in range(self.zeros.cols)]
        keep = list(range(len(basis)))
        changed = True
        while changed:
            changed = False
            for j, col in enumerate(rels):
                pick = None
                for pos, i in enumerate(keep):
                    if col[pos] == 1 and self.ids[i] not in protected:
                        pick = pos
                        break
                if pick is None:
                    continue
                # record the relation's original-coordinate realization,
                # then rewrite the other relations and drop the generator
                realization = [0] * self.basis.rows
                for pos, i2 in enumerate(keep):
                    for rr in range(self.basis.rows):
                        realization[rr] ^= poly_mul(col[pos], basis[pos][rr])
                zeros.append(realization)
                for j2, col2 in enumerate(rels):
                    if j2 == j or col2[pick] == 0:
                        continue
                    c = col2[pick]
                    for pos in range(len(keep)):
                        col2[pos] ^= poly_mul(c, col[pos])
                del rels[j]
                for col2 in rels:
                    del col2[pick]
                del basis[pick]
                del keep[pick]
                changed = True
                break
        m = len(keep)
        return _PageState(
            ids=self.ids,
            basis=PolyMatrix(
                self.basis.rows, m,
                tuple(tuple(basis[j][i] for j in range(m))
                      for i in range(self.basis.rows)),
            ),
            relations=PolyMatrix(
                m, len(rels),
                tuple(tuple(rels[j][i] for j in range(len(rels)))
                      for i in range(m)),
            ),
            zeros=PolyMatrix(
                self.basis.rows, len(zeros),
                tuple(tuple(zeros[j][i] for j in range(len(zeros)))
                      for i in range(self.basis.rows)),
            ),
        )

    def orders(self) -> tuple[Optional[int], ...]:
        res = snf(self.relations)
        out: list[Optional[int]] = []
        for i in range(self.basis.cols):
            d = res.diagonal[i] if i < len(res.diagonal) else 0
            if d == 0:
                out.append(None)
            elif d == 1:
                continue
            elif is_tau_power(d):
                out.append(poly_deg(d))
            else:
                raise UngradableError(f"invariant factor {d:#x} is not a tau power")
        return PresentedModule.of(out).orders


def _repair_boundaries(
    mid: _PageState,
    kmat: PolyMatrix,
    d_in: PolyMatrix,
    in_edges: Sequence[DiffEdge],
    bid: Bidegree,
    r: int,
) -> PolyMatrix:
    """Express boundaries in the kernel, allowing drawn-target corrections.

    A drawn differential names the leading class of its image; the actual
    image may add classes sharing the bidegree, and d.d = 0 can force such
    corrections.  Each failing boundary column is therefore adjusted along
    every current generator except the drawn target's own direction; if no
    adjustment lands in the kernel the data is genuinely inconsistent.
    """
    m = mid.basis.cols
    # directions pinned by the drawing: no correction may change the
    # coefficient of a drawn target class
    pinned: set[int] = set()
    for e in in_edges:
        unit = PolyMatrix(
            len(mid.ids), 1,
            tuple((1 if cid == e.target else 0,) for cid in mid.ids),
        )
        expressed = mid.express(unit)
        if expressed is None:
            continue
        ones = [k for k in range(m) if expressed.cells[k][0] == 1]
        if len(ones) == 1 and all(
            expressed.cells[k][0] == 0 for k in range(m) if k != ones[0]
        ):
            pinned.add(ones[0])
    cols: list[tuple] = []
    for j in range(d_in.cols):
        col = PolyMatrix(m, 1, tuple((d_in.cells[i][j],) for i in range(m)))
        plain = solve(kmat, col)
        if plain is not None:
            cols.append(col.column(0))
            continue
        allowed = [
            tuple(1 if k == i else 0 for k in range(m))
            for i in range(m)
            if i not in pinned
        ]
        corr = PolyMatrix(
            m, len(allowed), tuple(tuple(a[i] for a in allowed) for i in range(m))
        )
        fixed = solve(kmat.hstack(corr), col)
        if fixed is None:
            raise CompositionError(
                f"boundaries at {bid} do not lie in the page-{r} kernel"
            )
        adjusted = [col.cells[i][0] for i in range(m)]
        for a, vec in enumerate(allowed):
            w = fixed.cells[kmat.cols + a][0]
            if w:
                for i in range(m):
                    adjusted[i] ^= poly_mul(w, vec[i])
        cols.append(tuple(adjusted))
    # the middle module's own relations must lie in the kernel as they are
    for j in range(mid.relations.cols):
        cols.append(mid.relations.column(j))
    sub = PolyMatrix(
        m, len(cols), tuple(tuple(c[i] for c in cols) for i in range(m))
    )
    coords = solve(kmat, sub)
    if coords is None:
        raise CompositionError(
            f"boundaries at {bid} do not lie in the page-{r} kernel"
        )
    return coords


def _turn_states(
    states: dict[Bidegree, _PageState],
    edges: Sequence[DiffEdge],
    positions,
    r: int,
    protected: frozenset[str],
) -> None:
    """One page turn, in place: replace each touched bidegree's state by
    its homology with respect to the page-r edges."""
    by_src: dict[Bidegree, list[DiffEdge]] = {}
    by_tgt: dict[Bidegree, list[DiffEdge]] = {}
    for e in edges:
        by_src.setdefault(positions(e.source), []).append(e)
        by_tgt.setdefault(positions(e.target), []).append(e)
    touched = set(by_src) | set(by_tgt)
    for bid in sorted(touched):
        if bid not in states:
            raise ChartError(f"differential touches empty bidegree {bid}")
        states[bid] = states[bid].simplify(protected)
    new_states: dict[Bidegree, _PageState] = {}
    for bid in sorted(touched):
        stem, filt = bid
        mid = states[bid]
        tgt = states.get((stem - 1, filt + r))
        src = states.get((stem + 1, filt - r))

        def original_matrix(es: Sequence[DiffEdge], domain: _PageState,
                            codomain: _PageState) -> PolyMatrix:
            index_d = {cid: i for i, cid in enumerate(domain.ids)}
            index_c = {cid: i for i, cid in enumerate(codomain.ids)}
            rows = [[0] * len(domain.ids) for _ in codomain.ids]
            for e in es:
                rows[index_c[e.target]][index_d[e.source]] ^= tau_power(e.tau_power)
            return PolyMatrix.from_rows(rows, len(domain.ids))

        if tgt is not None and by_src.get(bid):
            d_out_orig = original_matrix(by_src[bid], mid, tgt)
            d_out = tgt.express(d_out_orig.mul(mid.basis))
            if d_out is None:
                raise CompositionError(
                    f"differential image at {bid} left the page-{r} module"
                )
        else:
            d_out = PolyMatrix.zero(0, mid.basis.cols)
        in_edges = by_tgt.get(bid) or []
        if src is not None and in_edges:
            d_in_orig = original_matrix(in_edges, src, mid)
            d_in = mid.express(d_in_orig.mul(src.basis))
            if d_in is None:
                raise CompositionError(
                    f"incoming differential at {bid} left the page-{r} module"
                )
        else:
            d_in = PolyMatrix.zero(mid.basis.cols, 0)

        if d_out.rows:
            ker_big = kernel(d_out.hstack(column_basis(tgt.relations)))
            kmat = PolyMatrix(
                mid.basis.cols,
                ker_big.cols,
                tuple(ker_big.cells[i] for i in range(mid.basis.cols)),
            )
        else:
            kmat = PolyMatrix.identity(mid.basis.cols)
        sub = d_in.hstack(mid.relations)
        coords = solve(kmat, sub)
        if coords is None:
            coords = _repair_boundaries(mid, kmat, d_in, in_edges, bid, r)
        boundary_vectors = (
            mid.basis.mul(d_in) if d_in.cols else PolyMatrix.zero(mid.basis.rows, 0)
        )
        new_states[bid] = _PageState(
            ids=mid.ids,
            basis=mid.basis.mul(kmat),
            relations=coords,
            zeros=mid.zeros.hstack(boundary_vectors),
        )
    states.update(new_states)


def turn_page(
    chart: ChartPage,
    r: int | Iterable[int],
    window: Optional[int] = None,
    *,
    include_uncertain: bool = False,
    f_cap: int = DEFAULT_F_CAP,
) -> ComputedPage:
    """Homology of the chart with respect to its page-r differentials.

    r may be a single page or a collection; a chart drawing several pages
    at once (the classical chart, the E4 charts) is turned page by page in
    ascending order, tracking how later differentials act on the
    subquotients left by earlier ones.  Dashed edges are excluded unless
    include_uncertain is set; the bidegrees they touch are remembered for
    the comparison's mitigation flags.
    """
    pages = sorted({r} if isinstance(r, int) else set(r))
    bad = {p for p in pages if not 2 <= p <= 5}
    if bad:
        raise ChartError(f"differential pages out of range: {sorted(bad)}")
    # the chart's own completeness bounds what is computable; the window
    # argument merely caps what is reported
    data_windows = [chart.window(f"d{p}") for p in pages] + [chart.window("classes")]
    known = [w for w in data_windows if w is not None]
    data_window = min(known) if known else MAX_STEM
    if window is None:
        window = data_window
    mat = materialize_towers(chart, f_cap)
    edges = list(mat.diff_edges) + _propagated(mat, f_cap)
    edges = [e for e in edges if e.page in set(pages)]
    uncertain_touched: set[Bidegree] = set()
    for e in edges:
        if e.uncertain:
            uncertain_touched.add(mat.position(e.source)[:2])
            uncertain_touched.add(mat.position(e.target)[:2])
    if not include_uncertain:
        edges = [e for e in edges if not e.uncertain]

    groups = _bidegree_generators(mat)
    states = {bid: _PageState.initial(nodes) for bid, nodes in groups.items()}
    positions = {}
    for bid, nodes in groups.items():
        for n in nodes:
            positions[n.id] = bid
    edges_at: dict[Bidegree, list[str]] = {}
    for e in edges:
        desc = f"d{e.page} {e.source}->{e.target} tau^{e.tau_power}"
        edges_at.setdefault(positions[e.source], []).append(desc)
        edges_at.setdefault(positions[e.target], []).append(desc)
    indeterminate: set[Bidegree] = set()
    for bid in groups:
        stem, filt = bid
        if stem + 1 > data_window or filt + max(pages) > f_cap:
            indeterminate.add(bid)
    for p in pages:
        protected = frozenset(
            cid for e in edges if e.page > p for cid in (e.source, e.target)
        )
        _turn_states(
            states, [e for e in edges if e.page == p], positions.get, p, protected
        )
    summands: dict[Bidegree, tuple[Optional[int], ...]] = {}
    for bid, state in states.items():
        if bid[0] > window or bid in indeterminate:
            continue
        orders = state.orders()
        if orders:
            summands[bid] = orders
    return ComputedPage(
        pages=tuple(pages),
        summands=summands,
        indeterminate=frozenset(indeterminate),
        uncertain_touched=frozenset(uncertain_touched),
        edges_at={bid: tuple(dict.fromkeys(v)) for bid, v in edges_at.items()},
    )


def published_summands(
    chart: ChartPage, f_cap: int = DEFAULT_F_CAP
) -> dict[Bidegree, tuple[Optional[int], ...]]:
    """Summand multisets of a published chart, towers expanded."""
    mat = materialize_towers(chart, f_cap)
    out: dict[Bidegree, list[Optional[int]]] = {}
    for node in mat.classes:
        out.setdefault(node.bidegree, []).append(node.tau_order)
    return {
        bid: PresentedModule.of(orders).orders for bid, orders in out.items()
    }


MITIGATIONS = (
    "uncertain_edge",
    "window_boundary",
    "tower_truncation",
    "subquotient_note",
)


@dataclass(frozen=True)
class DiscrepancyEntry:
    bidegree: Bidegree
    kind: str  # missing | extra | order_mismatch
    computed: tuple[Optional[int], ...]
    published: tuple[Optional[int], ...]
    contributing: tuple[str, ...]
    mitigations: frozenset[str]

    def render(self) -> str:
        flags = ",".join(sorted(self.mitigations)) or "-"
        edges = "; ".join(self.contributing) or "-"
        return (
            f"({self.bidegree[0]},{self.bidegree[1]}) {self.kind}"
            f" computed={summand_tokens(self.computed)}"
            f" published={summand_tokens(self.published)}"
            f" mitigations={flags} edges={edges}"
        )


@dataclass(frozen=True)
class DiscrepancyReport:
    entries: tuple[DiscrepancyEntry, ...]

    @property
    def unmitigated(self) -> tuple[DiscrepancyEntry, ...]:
        return tuple(e for e in self.entries if not e.mitigations)

    def is_empty(self) -> bool:
        return not self.entries

    def render(self) -> str:
        if not self.entries:
            return "no discrepancies\n"
        return "\n".join(e.render() for e in self.entries) + "\n"


def _diff_kind(
    computed: Counter, published: Counter
) -> str:
    extra = computed - published
    missing = published - computed
    if extra and not missing:
        return "extra"
    if missing and not extra:
        return "missing"
    return "order_mismatch"


def compare(
    computed: ComputedPage,
    published: ChartPage,
    window: int,
    *,
    f_cap: int = DEFAULT_F_CAP,
) -> DiscrepancyReport:
    """Per-bidegree multiset comparison of a computed page against a
    published chart, with mitigation flags on every surviving entry."""
    pub = published_summands(published, f_cap)
    pub_window = published.window("classes")
    pub_uncertain: set[Bidegree] = set()
    for e in published.diff_edges:
        if e.uncertain:
            pub_uncertain.add(published.position(e.source)[:2])
            pub_uncertain.add(published.position(e.target)[:2])
    rmax = max(computed.pages)
    entries = []
    support = set(computed.summands) | set(pub)
    for bid in sorted(support):
        stem, filt = bid
        if stem > window or bid in computed.indeterminate:
            continue
        got = Counter(computed.summands.get(bid, ()))
        want = Counter(pub.get(bid, ()))
        if got == want:
            continue
        mitigations = set()
        if bid in computed.uncertain_touched or bid in pub_uncertain:
            mitigations.add("uncertain_edge")
        if stem + 1 > window or stem + 1 > (pub_window or window):
            mitigations.add("window_boundary")
        if filt + rmax > f_cap:
            mitigations.add("tower_truncation")
        if pub_window is not None and stem > pub_window:
            mitigations.add("subquotient_note")
        entries.append(
            DiscrepancyEntry(
                bidegree=bid,
                kind=_diff_kind(got, want),
                computed=tuple(sorted(got.elements(), key=lambda k: (k is not None, k or 0))),
                published=tuple(sorted(want.elements(), key=lambda k: (k is not None, k or 0))),
                contributing=computed.edges_at.get(bid, ()),
                mitigations=frozenset(mitigations),
            )
        )
    return DiscrepancyReport(entries=tuple(entries))
