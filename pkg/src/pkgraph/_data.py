"""Loading helpers for packaged and external line-oriented data tables."""

from __future__ import annotations

from importlib import resources
from typing import List


def _filter_lines(text: str) -> List[str]:
    lines = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        lines.append(line)
    return lines


def read_data_lines(name: str) -> List[str]:
    """Non-comment lines of a table shipped under pkgraph/data/."""
    text = resources.files("pkgraph").joinpath("data", name).read_text(encoding="utf-8")
    return _filter_lines(text)


def read_file_lines(path) -> List[str]:
    """Non-comment lines of an external table file."""
    with open(path, "r", encoding="utf-8") as handle:
        return _filter_lines(handle.read())
