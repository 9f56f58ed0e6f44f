from dataclasses import replace

import pytest

from adamscharts.model import (
    ChartPage,
    ClassNode,
    DiffEdge,
    StructEdge,
)
from adamscharts.validator import (
    ConfigurationError,
    ctau_check,
    leibniz_audit,
    validate_structure,
)


def test_corpus_has_no_error_findings(corpus):
    for chart in corpus.values():
        errors = [f for f in validate_structure(chart) if f.severity == "error"]
        assert errors == [], chart.chart_id


def test_synthetic_bad_differential_shift():
    a = ClassNode(stem=10, filtration=3)
    b = ClassNode(stem=9, filtration=6)
    chart = ChartPage(
        variant="classical", page="E2", classes=(a, b),
        diff_edges=(DiffEdge(page=2, source=a.id, target=b.id),),
    )
    findings = validate_structure(chart)
    assert any(f.rule == "diff-shift" and f.severity == "error" for f in findings)


def test_synthetic_tau_coherence_error():
    a = ClassNode(stem=3, filtration=2, tau_order=None)
    b = ClassNode(stem=3, filtration=3, tau_order=1)
    chart = ChartPage(
        variant="motivic", page="cohomology", classes=(a, b),
        struct_edges=(
            StructEdge(kind="h0", source=a.id, target=b.id, tau_power=1),
        ),
    )
    findings = validate_structure(chart)
    assert any(f.rule == "tau-coherence" and f.severity == "error" for f in findings)


def test_overlap_reported_as_warning_only(corpus):
    findings = validate_structure(corpus["cofiber_tau-E2"])
    overlaps = [f for f in findings if f.rule == "dr-overlap"]
    assert overlaps and all(f.severity == "warning" for f in overlaps)


# ------------------------------------------------------------- leibniz


def test_leibniz_no_violations_on_corpus(corpus):
    for chart in corpus.values():
        cases = leibniz_audit(chart)
        assert [c for c in cases if c.verdict == "violated"] == [], chart.chart_id


def test_leibniz_confirmed_in_low_stems(corpus):
    chart = corpus["classical-E2"]
    window = [
        c for c in leibniz_audit(chart)
        if 14 <= chart.position(c.x)[0] <= 17
    ]
    assert window
    assert all(c.verdict in ("confirmed", "undetermined") for c in window)
    assert any(c.verdict == "confirmed" for c in window)


def test_leibniz_empty_without_multiplications(corpus):
    chart = replace(corpus["classical-E2"], struct_edges=())
    assert leibniz_audit(chart) == []


def test_leibniz_mutation_yields_violation(corpus):
    # deleting d(h.x) while keeping the other three legs must surface as
    # a violation for at least one confirmed instance
    chart = corpus["classical-E2"]
    produced = []
    for confirmed in leibniz_audit(chart):
        if confirmed.verdict != "confirmed":
            continue
        pruned = replace(
            chart,
            diff_edges=tuple(
                e for e in chart.diff_edges if e.source != confirmed.y
            ),
        )
        hit = [
            c for c in leibniz_audit(pruned)
            if (c.x, c.kind, c.y, c.z)
            == (confirmed.x, confirmed.kind, confirmed.y, confirmed.z)
            and c.verdict == "violated"
        ]
        if hit:
            produced = hit
            break
    assert produced, "no deletion produced a violation"


# ----------------------------------------------------------------- ctau


def test_ctau_identity_on_corpus(corpus):
    shift, findings = ctau_check(
        corpus["motivic-cohomology"], corpus["cofiber_tau-E2"], 59
    )
    assert shift == (1, -1)
    assert findings == []


def test_ctau_low_bidegrees_by_hand(corpus):
    sphere = corpus["motivic-cohomology"]
    ctau = corpus["cofiber_tau-E2"]
    # one bottom-cell class over the single sphere summand at the origin
    origin = [c for c in ctau.classes if c.bidegree == (0, 0)]
    assert len(origin) == 1 and origin[0].provenance == "bottom_cell"
    # the projection-detected class over the tau-torsion summand at (4,4)
    top = [c for c in ctau.classes if c.bidegree == (5, 3)]
    assert len(top) == 1 and top[0].provenance == "top_cell"
    assert top[0].name == "$\\overline{h_1^4}$"
    sphere_44 = [c for c in sphere.classes if c.bidegree == (4, 4)]
    assert len(sphere_44) == 1 and sphere_44[0].tau_order == 1


def test_ctau_calibration_fails_loudly(corpus):
    sphere = corpus["motivic-cohomology"]
    broken = replace(
        corpus["cofiber_tau-E2"],
        classes=tuple(
            replace(c, provenance="bottom_cell")
            for c in corpus["cofiber_tau-E2"].classes
        ),
    )
    with pytest.raises(ConfigurationError):
        ctau_check(sphere, broken, 59)
