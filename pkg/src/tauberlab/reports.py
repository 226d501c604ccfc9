"""Inequality records and deterministic CSV output."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence


@dataclass(frozen=True)
class BoundReport:
    """One evaluation of ``lhs <= rhs`` at ``grid_point``."""

    grid_point: Any
    lhs: float
    rhs: float
    ratio: float
    tags: dict = field(default_factory=dict, compare=False)

    @classmethod
    def make(cls, grid_point, lhs, rhs, **tags) -> "BoundReport":
        return cls(grid_point, float(lhs), float(rhs), safe_ratio(lhs, rhs), tags)

    def violated(self, slack: float = 1e-9) -> bool:
        return not self.ratio <= 1.0 + slack


def safe_ratio(lhs, rhs) -> float:
    lhs, rhs = float(lhs), float(rhs)
    if rhs > 0:
        return lhs / rhs
    return 0.0 if lhs == 0 else math.inf


def fmt(value) -> str:
    """17 significant digits, '.' decimal; complex as ``re+imj``."""
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    if isinstance(value, complex):
        return f"{value.real:.17g}{value.imag:+.17g}j"
    try:
        return f"{float(value):.17g}"
    except (TypeError, ValueError):
        return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(csv_text(header, rows))
