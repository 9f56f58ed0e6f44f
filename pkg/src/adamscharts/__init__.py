"""Toolkit for machine-embedded Adams spectral sequence charts.

Parses the embedded picture blocks of a chart document, models the result
as multigraded modules over F2[tau] with differentials and extensions,
recomputes later pages from earlier ones, validates the legend-level laws,
and renders charts deterministically.
"""

from .model import (
    ChartError,
    ChartPage,
    ClassNode,
    CompletenessWindow,
    DiffEdge,
    ExtensionEdge,
    StructEdge,
    TowerArrow,
    diff_shift,
    materialize_towers,
    restrict,
    struct_shift,
)
from .extract import extract_document, parse_commands, scan_blocks, snap
from .chartir import parse as parse_chartir, serialize as serialize_chartir
from .taualgebra import PolyMatrix, PresentedModule, homology, poly_gcd, snf
from .pageengine import compare, group_by_bidegree, turn_page
from .validator import ctau_check, leibniz_audit, validate_structure
from .render import StyleProfile, render

__all__ = [
    "ChartError",
    "ChartPage",
    "ClassNode",
    "CompletenessWindow",
    "DiffEdge",
    "ExtensionEdge",
    "StructEdge",
    "TowerArrow",
    "diff_shift",
    "materialize_towers",
    "restrict",
    "struct_shift",
    "extract_document",
    "parse_commands",
    "scan_blocks",
    "snap",
    "parse_chartir",
    "serialize_chartir",
    "PolyMatrix",
    "PresentedModule",
    "homology",
    "poly_gcd",
    "snf",
    "compare",
    "group_by_bidegree",
    "turn_page",
    "ctau_check",
    "leibniz_audit",
    "validate_structure",
    "StyleProfile",
    "render",
]
