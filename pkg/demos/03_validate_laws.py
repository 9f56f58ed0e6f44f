"""
Validating the legend-level laws
================================

Every structural rule the chart legends state is checked mechanically:
bidegree shifts, tau-coherence, the Leibniz rule, and the cell-count
identity tying the cofiber-of-tau chart to the sphere's.
"""

from collections import Counter
from pathlib import Path

from adamscharts import extract_document, validate_structure, leibniz_audit, ctau_check

document = (Path(__file__).resolve().parents[1] / "paper.md").read_text()
charts = {c.chart_id: c for c in extract_document(document)}

# structural validation: errors would block, warnings are informational
for cid, chart in charts.items():
    severities = Counter(f.severity for f in validate_structure(chart))
    print(f"{cid:22s} {dict(severities) or 'clean'}")

# the Leibniz rule d(h.x) = h.d(x), audited wherever it is testable
chart = charts["motivic-E2"]
verdicts = Counter(c.verdict for c in leibniz_audit(chart))
print(f"\nLeibniz audit on {chart.chart_id}: {dict(verdicts)}")

# the long-exact-sequence bookkeeping: every sphere summand contributes a
# bottom-cell class, every torsion summand a shifted top-cell class
shift, findings = ctau_check(
    charts["motivic-cohomology"], charts["cofiber_tau-E2"], 59
)
print(f"\ncofiber-of-tau check: calibrated shift {shift}, findings {len(findings)}")
