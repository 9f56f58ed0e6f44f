"""
Extracting charts from the bundled document
===========================================

Parse every embedded picture block into a typed chart page and poke at
what came out.
"""

from pathlib import Path

from adamscharts import extract_document

document = (Path(__file__).resolve().parents[1] / "paper.md").read_text()

# each block becomes one ChartPage: classes, multiplication lines,
# differentials, hidden extensions, tower arrows
charts = {c.chart_id: c for c in extract_document(document)}
for cid, chart in charts.items():
    print(
        f"{cid:22s} classes={len(chart.classes):4d}"
        f" diff={len(chart.diff_edges):3d} towers={len(chart.towers):3d}"
    )

# a single class carries its bidegree, draw offset, torsion order and name
e2 = charts["motivic-E2"]
named = [c for c in e2.classes if c.name]
print(f"\n{len(named)} named classes on the E2 page; a few of them:")
for c in named[:5]:
    print(f"  ({c.stem},{c.filtration})  {c.name}")

# the tau-power coefficients live on the edges; here is the d2 that hits
# tau times a generator in the 40-stem
edge = next(e for e in e2.diff_edges if e.tau_power == 1)
src, dst = e2.position(edge.source), e2.position(edge.target)
print(f"\nd{edge.page}: {src[:2]} -> tau^{edge.tau_power} . {dst[:2]}")
