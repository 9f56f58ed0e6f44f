import pytest

from adamscharts import chartir
from adamscharts.model import ChartPage, ClassNode, CompletenessWindow


def test_round_trip_whole_corpus(corpus):
    for chart in corpus.values():
        text = chartir.serialize(chart)
        assert chartir.parse(text) == chart
        assert chartir.serialize(chartir.parse(text)) == text


def test_serialize_is_stable(corpus):
    chart = corpus["motivic-E3"]
    assert chartir.serialize(chart) == chartir.serialize(chart)


def test_empty_chart_is_header_only():
    chart = ChartPage(variant="classical", page="E2")
    text = chartir.serialize(chart)
    assert text == "chartir 1\nchart classical E2\n"


def test_single_class_record():
    chart = ChartPage(
        variant="classical", page="E2",
        windows=(CompletenessWindow("classes", 70),),
        classes=(ClassNode(stem=0, filtration=0),),
    )
    text = chartir.serialize(chart)
    assert text.splitlines() == [
        "chartir 1",
        "chart classical E2",
        "window classes 70",
        "class 0 0 +0 0 free - - - -",
    ]


def test_names_percent_escaped():
    chart = ChartPage(
        variant="motivic", page="cohomology",
        classes=(ClassNode(stem=1, filtration=1, name="$P c_0 d_0$ 100%",
                           label_angle=210),),
    )
    text = chartir.serialize(chart)
    assert "$P%20c_0%20d_0$%20100%25" in text
    assert chartir.parse(text).classes[0].name == "$P c_0 d_0$ 100%"


def test_parse_empty_input_is_missing_header():
    with pytest.raises(chartir.ChartirError) as err:
        chartir.parse("")
    assert "missing header" in str(err.value)


def test_parse_rejects_wrong_version():
    with pytest.raises(chartir.ChartirError):
        chartir.parse("chartir 2\nchart classical E2\n")


def test_parse_rejects_out_of_order_records(corpus):
    text = chartir.serialize(corpus["classical-Einf"])
    lines = text.splitlines()
    first = next(i for i, l in enumerate(lines) if l.startswith("class"))
    lines[first], lines[first + 1] = lines[first + 1], lines[first]
    with pytest.raises(chartir.ChartirError) as err:
        chartir.parse("\n".join(lines) + "\n")
    assert err.value.line == first + 2
    assert "order" in str(err.value)


def test_parse_rejects_malformed_record_with_line():
    text = "chartir 1\nchart classical E2\nclass zero 0 +0 0 free - - - -\n"
    with pytest.raises(chartir.ChartirError) as err:
        chartir.parse(text)
    assert err.value.line == 3


def test_parse_rejects_trailing_whitespace():
    text = "chartir 1\nchart classical E2\nwindow classes 70 \n"
    with pytest.raises(chartir.ChartirError):
        chartir.parse(text)


def test_parse_rejects_missing_final_newline():
    with pytest.raises(chartir.ChartirError):
        chartir.parse("chartir 1\nchart classical E2")


def test_parse_rejects_duplicate_class():
    text = (
        "chartir 1\nchart classical E2\n"
        "class 0 0 +0 0 free - - - -\nclass 0 0 +0 0 free - - - -\n"
    )
    with pytest.raises(chartir.ChartirError) as err:
        chartir.parse(text)
    assert "duplicate" in str(err.value)


def test_parse_rejects_unknown_edge_reference():
    text = (
        "chartir 1\nchart classical E2\n"
        "class 0 0 +0 0 free - - - -\n"
        "struct h0 0:0:+0 0:1:+0 0 - -\n"
    )
    with pytest.raises(chartir.ChartirError) as err:
        chartir.parse(text)
    assert "0:1:+0" in str(err.value)


def test_parse_accepts_tower_references(corpus):
    chart = corpus["motivic-E2"]
    text = chartir.serialize(chart)
    assert "^" in text  # differentials into tower members
    assert chartir.parse(text) == chart


def test_escape_round_trip():
    for name in ["-", "a b", "100%", "x%20y", "line\nbreak", "\ttab"]:
        assert chartir.unescape(chartir.escape(name)) == name
