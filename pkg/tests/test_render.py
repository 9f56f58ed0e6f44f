from pathlib import Path

import pytest

from adamscharts.model import ChartPage, restrict
from adamscharts.render import DEFAULT_COLORS, IncompleteStyleError, StyleProfile, render

GOLDEN = Path(__file__).parent / "goldens" / "classical-E2-stems-0-5.svg"


def test_render_is_deterministic(corpus):
    chart = corpus["motivic-Einf"]
    assert render(chart) == render(chart)


def test_golden_five_stem_excerpt(corpus):
    chart = restrict(corpus["classical-E2"], 5)
    assert render(chart).encode() == GOLDEN.read_bytes()


def test_empty_chart_renders_grid_only():
    svg = render(ChartPage(variant="classical", page="E2"))
    assert "<line" in svg and "<circle" not in svg and "<path" not in svg


def test_single_class_is_one_circle():
    from adamscharts.model import ClassNode

    chart = ChartPage(
        variant="classical", page="E2", classes=(ClassNode(stem=0, filtration=0),)
    )
    svg = render(chart)
    assert svg.count("<circle") == 1


def test_element_counts_match_model(corpus):
    chart = corpus["motivic-cohomology"]
    svg = render(chart)
    squares = sum(1 for c in chart.classes if c.hidden_tau_marker)
    assert svg.count("<circle") == len(chart.classes) - squares
    assert svg.count("<rect") == squares
    # one path per edge or tower arrow
    edges = (
        len(chart.struct_edges) + len(chart.diff_edges)
        + len(chart.extension_edges) + len(chart.towers)
    )
    assert svg.count("<path") == edges
    labels = sum(1 for c in chart.classes if c.name is not None)
    assert svg.count("<text") == labels


def test_incomplete_style_is_an_error(corpus):
    colors = dict(DEFAULT_COLORS)
    del colors["ext:nu"]
    with pytest.raises(IncompleteStyleError):
        render(corpus["classical-Einf"], StyleProfile(colors=colors))


def test_labels_escaped(corpus):
    chart = corpus["cofiber_tau-E2"]
    svg = render(chart)
    assert "&" not in svg.replace("&amp;", "").replace("&lt;", "").replace("&gt;", "")


def test_y_axis_points_up(corpus):
    chart = restrict(corpus["classical-E2"], 3)
    svg = render(chart)
    # the origin class must sit below the (3,1) class in SVG coordinates
    lines = [l for l in svg.splitlines() if "<circle" in l]
    import re

    def cy(line):
        return float(re.search(r'cy="([0-9.]+)"', line).group(1))

    def cx(line):
        return float(re.search(r'cx="([0-9.]+)"', line).group(1))

    origin = next(l for l in lines if cx(l) == min(cx(l) for l in lines))
    top = min(cy(l) for l in lines)
    assert cy(origin) == max(cy(l) for l in lines)
    assert top < cy(origin)
