"""
Rendering charts to SVG
=======================

Deterministic rendering with the printed conventions: filtration grows
upward, dot colors encode torsion orders or cell provenance, dashes mark
unverified edges.
"""

from pathlib import Path

from adamscharts import extract_document, render, restrict

here = Path(__file__).resolve().parent
document = (here.parent / "paper.md").read_text()
charts = {c.chart_id: c for c in extract_document(document)}

out_dir = here / "out"
out_dir.mkdir(exist_ok=True)

# a low-stem excerpt of each variant's starting page
for cid in ("classical-E2", "motivic-cohomology", "cofiber_tau-E2"):
    excerpt = restrict(charts[cid], 20)
    path = out_dir / f"{cid}-stems-0-20.svg"
    path.write_text(render(excerpt))
    print(f"wrote {path.relative_to(here.parent)} ({path.stat().st_size} bytes)")

# rendering is a pure function: same input, same bytes
svg_a = render(restrict(charts["motivic-Einf"], 30))
svg_b = render(restrict(charts["motivic-Einf"], 30))
print("byte-deterministic:", svg_a == svg_b)
