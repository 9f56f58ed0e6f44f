"""Shared fixtures: the bundled chart corpus and independent text oracles.

The oracle helpers re-scan the raw document with fresh regexes so tests
can check the extractor against something that shares none of its code.
"""

from __future__ import annotations

import re
from pathlib import Path

import pytest

from adamscharts.extract import extract_document

REPO = Path(__file__).resolve().parents[1]
CORPUS_PATH = REPO / "paper.md"

_NUM = r"(-?\d+(?:\.\d+)?)"
_PAIR = rf"\(\s*{_NUM}\s*,\s*{_NUM}\s*\)"


@pytest.fixture(scope="session")
def corpus_text() -> str:
    return CORPUS_PATH.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def corpus(corpus_text):
    """All chart pages of the bundled document, keyed by chart id."""
    return {c.chart_id: c for c in extract_document(corpus_text)}


def oracle_blocks(text: str) -> list[str]:
    """Raw picture blocks, by a scan independent of the package."""
    out = []
    depth_start = None
    lines = text.split("\n")
    buf: list[str] = []
    for line in lines:
        if "\\begin{pspicture}" in line:
            depth_start = True
            buf = []
            continue
        if "\\end{pspicture}" in line:
            out.append("\n".join(buf))
            depth_start = None
            continue
        if depth_start:
            buf.append(line)
    return out


def oracle_marker_positions(block: str) -> set[tuple[float, float]]:
    """Distinct dot and square positions drawn in one block.

    A repeated marker at the very same spot draws one visible marker, so
    positions are deduplicated; squares locate at their frame's center.
    """
    dots = {
        (float(x), float(y))
        for x, y in re.findall(rf"\\pscircle\*(?:\[[^\]]*\])?{_PAIR}", block)
    }
    squares = {
        ((float(a) + float(c)) / 2, (float(b) + float(d)) / 2)
        for a, b, c, d in re.findall(rf"\\psframe\[[^\]]*\]{_PAIR}{_PAIR}", block)
    }
    return dots | squares


def oracle_marker_count(block: str) -> int:
    return len(oracle_marker_positions(block))
