"""
Turning pages and diffing against the published charts
======================================================

Compute a later page as homology of an earlier one and check that the
result matches what was published, bidegree by bidegree.
"""

from pathlib import Path

from adamscharts import extract_document, turn_page, compare

document = (Path(__file__).resolve().parents[1] / "paper.md").read_text()
charts = {c.chart_id: c for c in extract_document(document)}

# the whole ladder: each computed page against the next published chart
for source, pages, published, window in [
    ("motivic-E2", 2, "motivic-E3", 65),
    ("motivic-E3", 3, "motivic-E4", 65),
    ("motivic-E4", (4, 5), "motivic-Einf", 59),
    ("classical-E2", (2, 3, 4, 5), "classical-Einf", 59),
]:
    computed = turn_page(charts[source], pages, window=window)
    report = compare(computed, charts[published], window)
    status = "clean" if report.is_empty() else f"{len(report.entries)} entries"
    print(f"{source} -> {published} (stems <= {window}): {status}")

# what a single bidegree looks like after the turn: the tau-coefficient
# differential of the 41-stem leaves an order-one torsion class behind
computed = turn_page(charts["motivic-E2"], 2, window=41)
print("\nsummands at (40,6) on the computed page:", computed.summands[(40, 6)])

# dropping a differential on purpose makes the comparison speak up
from dataclasses import replace

chart = charts["motivic-E2"]
pruned = replace(
    chart,
    diff_edges=tuple(
        e for e in chart.diff_edges if chart.position(e.source)[:2] != (41, 4)
    ),
)
report = compare(turn_page(pruned, 2, window=65), charts["motivic-E3"], 65)
print("\nafter deleting the d2 of the 41-stem:")
print(report.render())
