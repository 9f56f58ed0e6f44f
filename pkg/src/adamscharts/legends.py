"""Per-chart legend profiles: what each color macro and line style means.

Every chart section of the source document carries a legend; the tables
below transcribe those legends into lookup form.  A color occurring in a
block without an entry in its profile is a hard parse error, never a silent
skip.

Two conventions are global.  A line's species comes from its color table
and its snapped slope: vertical, slope 1, and slope 1/3 lines are h0, h1,
and h2 multiplications, lines of slope -r are d_r differentials.  Dashed
means "plausible but unverified"; dotted marks products hidden in the May
spectral sequence (the classical chart's dotted lines are imported under
the same flag even though its own legend leaves them undefined).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .model import FREE, CompletenessWindow


@dataclass(frozen=True)
class DotStyle:
    tau_order: Optional[int] = FREE
    provenance: str = "none"


@dataclass(frozen=True)
class LineStyle:
    tau_power: int = 0
    provenance: str = "none"
    kind: Optional[str] = None  # fixed h0/h1/h2 when the color pins it


@dataclass(frozen=True)
class DiffStyle:
    tau_power: int = 0
    pages: frozenset[int] = frozenset({2, 3, 4, 5})


@dataclass(frozen=True)
class LegendProfile:
    """Semantic tables for one chart block."""

    tag: str                   # section label in the source document
    variant: str
    page: str
    title: str                 # exact embedded title, for cross-checking
    windows: tuple[CompletenessWindow, ...]
    dots: Mapping[str, DotStyle]
    squares: Mapping[str, DotStyle] = field(default_factory=dict)
    struct_lines: Mapping[str, LineStyle] = field(default_factory=dict)
    diff_lines: Mapping[str, DiffStyle] = field(default_factory=dict)
    towers: Mapping[str, str] = field(default_factory=dict)  # color -> kind|by_slope
    extensions: frozenset[str] = frozenset()
    solid_diff_pages: frozenset[int] = frozenset()
    dashed_diff_pages: frozenset[int] = frozenset()
    # Exceptional tau powers for "tau^k, k >= 2" colors, keyed by the source
    # bidegree of the edge; the legend prose names these instances.
    diff_power_overrides: Mapping[tuple[int, int], int] = field(default_factory=dict)

    @property
    def chart_id(self) -> str:
        return f"{self.variant}-{self.page}"


def _w(**features: int) -> tuple[CompletenessWindow, ...]:
    return tuple(CompletenessWindow(k, v) for k, v in features.items())


_CLASSICAL_DOTS = {"DEFAULT": DotStyle(FREE)}

_MOTIVIC_DOTS = {
    "DEFAULT": DotStyle(FREE),
    "tauonecolor": DotStyle(1),
    "tautwocolor": DotStyle(2),
    "tauthreecolor": DotStyle(3),
    "taufourcolor": DotStyle(4),
}

_CTAU_DOTS = {
    "DEFAULT": DotStyle(1, "bottom_cell"),
    "tauonecolor": DotStyle(1, "top_cell"),
}

_MOTIVIC_SQUARES = {
    "black": DotStyle(FREE),
    "tautwocolor": DotStyle(2),
    "tauthreecolor": DotStyle(3),
}

_CLASSICAL_STRUCT = {"tauzerocolor": LineStyle()}

_MOTIVIC_STRUCT = {
    "tauzerocolor": LineStyle(),
    "tauonecolor": LineStyle(),
    "tautwocolor": LineStyle(),
    "tauthreecolor": LineStyle(),
    "hzerotaucolor": LineStyle(tau_power=1, kind="h0"),
    "honetaucolor": LineStyle(tau_power=1, kind="h1"),
    "htwotaucolor": LineStyle(tau_power=1, kind="h2"),
    "hzeromoretaucolor": LineStyle(tau_power=2, kind="h0"),
    "honemoretaucolor": LineStyle(tau_power=2, kind="h1"),
    "htwomoretaucolor": LineStyle(tau_power=2, kind="h2"),
}

_CTAU_STRUCT = {
    "tauzerocolor": LineStyle(provenance="bottom_cell"),
    "tauonecolor": LineStyle(provenance="top_cell"),
    "Ctauhiddenhzerocolor": LineStyle(provenance="hidden", kind="h0"),
    "Ctauhiddenhonecolor": LineStyle(provenance="hidden", kind="h1"),
    "Ctauhiddenhtwocolor": LineStyle(provenance="hidden", kind="h2"),
}

_CLASSICAL_DIFFS = {
    "dtwocolor": DiffStyle(pages=frozenset({2})),
    "dthreecolor": DiffStyle(pages=frozenset({3})),
    "dfourcolor": DiffStyle(pages=frozenset({4})),
    "dfivecolor": DiffStyle(pages=frozenset({5})),
}


def _motivic_diffs(*pages: int) -> dict[str, DiffStyle]:
    ps = frozenset(pages)
    return {
        "dtwocolor": DiffStyle(0, ps),
        "dtwotaucolor": DiffStyle(1, ps),
        "dtwomoretaucolor": DiffStyle(2, ps),
    }


_CLASSICAL_TOWERS = {"hzerotowercolor": "h0_tower"}
_MOTIVIC_TOWERS = {"hzerotowercolor": "h0_tower", "honetowercolor": "h1_tower"}
# Cofiber-of-tau tower arrows are drawn in the dot colors; their kind comes
# from the arrow direction.
_CTAU_TOWERS = {
    "hzerotowercolor": "h0_tower",
    "tauzerocolor": "by_slope",
    "tauonecolor": "by_slope",
}


PROFILES: tuple[LegendProfile, ...] = (
    LegendProfile(
        tag="Adams-cl",
        variant="classical",
        page="E2",
        title="The classical Adams spectral sequence",
        windows=_w(classes=70, d2=70, d3=65, d4=65, d5=65),
        dots=_CLASSICAL_DOTS,
        struct_lines=_CLASSICAL_STRUCT,
        diff_lines=_CLASSICAL_DIFFS,
        towers=_CLASSICAL_TOWERS,
        solid_diff_pages=frozenset({2, 3, 4, 5}),
        dashed_diff_pages=frozenset({3, 4, 5}),
    ),
    LegendProfile(
        tag="Einfty-cl",
        variant="classical",
        page="Einf",
        title="The $E_\\infty$-page of the classical Adams spectral sequence",
        windows=_w(classes=59, hidden_extensions=59),
        dots=_CLASSICAL_DOTS,
        struct_lines=_CLASSICAL_STRUCT,
        diff_lines=_CLASSICAL_DIFFS,
        towers=_CLASSICAL_TOWERS,
        extensions=frozenset({"two", "eta", "nu"}),
        dashed_diff_pages=frozenset({3, 4, 5}),
    ),
    LegendProfile(
        tag="cohlgy-mot",
        variant="motivic",
        page="cohomology",
        title="The cohomology of the motivic Steenrod algebra",
        windows=_w(classes=70),
        dots=_MOTIVIC_DOTS,
        squares=_MOTIVIC_SQUARES,
        struct_lines=_MOTIVIC_STRUCT,
        towers=_MOTIVIC_TOWERS,
    ),
    LegendProfile(
        tag="E2-mot",
        variant="motivic",
        page="E2",
        title="The $E_2$-page of the motivic Adams spectral sequence",
        windows=_w(classes=70, d2=70),
        dots=_MOTIVIC_DOTS,
        struct_lines=_MOTIVIC_STRUCT,
        diff_lines=_motivic_diffs(2),
        towers=_MOTIVIC_TOWERS,
        solid_diff_pages=frozenset({2}),
    ),
    LegendProfile(
        tag="E3-mot",
        variant="motivic",
        page="E3",
        title="The $E_3$-page of the motivic Adams spectral sequence",
        windows=_w(classes=65, d3=65),
        dots=_MOTIVIC_DOTS,
        struct_lines=_MOTIVIC_STRUCT,
        diff_lines=_motivic_diffs(3),
        towers=_MOTIVIC_TOWERS,
        solid_diff_pages=frozenset({3}),
        dashed_diff_pages=frozenset({3}),
        # The legend names the single d3 that hits tau^4 times a generator;
        # every other orange d3 hits tau^2.
        diff_power_overrides={(69, 13): 4},
    ),
    LegendProfile(
        tag="E4-mot",
        variant="motivic",
        page="E4",
        title="The $E_4$-page of the motivic Adams spectral sequence",
        windows=_w(classes=65, d4=65, d5=65),
        dots=_MOTIVIC_DOTS,
        struct_lines=_MOTIVIC_STRUCT,
        diff_lines=_motivic_diffs(3, 4, 5),
        towers=_MOTIVIC_TOWERS,
        solid_diff_pages=frozenset({4, 5}),
        dashed_diff_pages=frozenset({3, 4, 5}),
    ),
    LegendProfile(
        tag="Einfty-mot",
        variant="motivic",
        page="Einf",
        title="The $E_\\infty$-page of the motivic Adams spectral sequence",
        windows=_w(classes=59),
        dots=_MOTIVIC_DOTS,
        struct_lines=_MOTIVIC_STRUCT,
        diff_lines=_motivic_diffs(3, 4, 5),
        towers=_MOTIVIC_TOWERS,
        extensions=frozenset({"tau"}),
        dashed_diff_pages=frozenset({3, 4, 5}),
    ),
    LegendProfile(
        tag="E2-Ctau",
        variant="cofiber_tau",
        page="E2",
        title="The $E_2$-page of the motivic Adams spectral sequence"
              " for the cofiber of $\\tau$",
        windows=_w(classes=70, d2=70),
        dots=_CTAU_DOTS,
        struct_lines=_CTAU_STRUCT,
        diff_lines={"dtwocolor": DiffStyle(pages=frozenset({2}))},
        towers=_CTAU_TOWERS,
        solid_diff_pages=frozenset({2}),
        dashed_diff_pages=frozenset({2}),
    ),
    LegendProfile(
        tag="E3-Ctau",
        variant="cofiber_tau",
        page="E3",
        title="The $E_3$-page of the motivic Adams spectral sequence"
              " for the cofiber of $\\tau$",
        windows=_w(classes=70, d3=64),
        dots=_CTAU_DOTS,
        struct_lines=_CTAU_STRUCT,
        diff_lines={"dtwocolor": DiffStyle(pages=frozenset({2, 3}))},
        towers=_CTAU_TOWERS,
        solid_diff_pages=frozenset({3}),
        dashed_diff_pages=frozenset({2, 3}),
    ),
    LegendProfile(
        tag="E4-Ctau",
        variant="cofiber_tau",
        page="E4",
        title="The $E_4$-page of the motivic Adams spectral sequence"
              " for the cofiber of $\\tau$",
        windows=_w(classes=64, d4=64, d5=64),
        dots=_CTAU_DOTS,
        struct_lines=_CTAU_STRUCT,
        diff_lines={"dtwocolor": DiffStyle(pages=frozenset({2, 3, 4, 5}))},
        towers=_CTAU_TOWERS,
        solid_diff_pages=frozenset({4, 5}),
        dashed_diff_pages=frozenset({2, 3, 4}),
    ),
    LegendProfile(
        tag="Einfty-Ctau",
        variant="cofiber_tau",
        page="Einf",
        title="The $E_\\infty$-page of the motivic Adams spectral sequence"
              " for the cofiber of $\\tau$",
        windows=_w(classes=63, hidden_extensions=59),
        dots=_CTAU_DOTS,
        struct_lines=_CTAU_STRUCT,
        diff_lines={"dtwocolor": DiffStyle(pages=frozenset({2, 3, 4}))},
        towers=_CTAU_TOWERS,
        extensions=frozenset({"two", "eta", "nu"}),
        dashed_diff_pages=frozenset({2, 3, 4}),
    ),
)

BY_TAG: dict[str, LegendProfile] = {p.tag: p for p in PROFILES}
BY_CHART_ID: dict[str, LegendProfile] = {p.chart_id: p for p in PROFILES}
