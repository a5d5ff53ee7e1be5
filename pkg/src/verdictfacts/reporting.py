"""Percentage rendering and plain-text table layout.

All percentages in reports are computed from integer counts with decimal
arithmetic and half-up rounding, so a table cell can always be reproduced
exactly from the counts behind it.
"""

from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence


def percent_value(count: int | float, total: int | float, decimals: int = 2) -> Decimal:
    """``100 * count / total`` rounded half-up to ``decimals`` places."""
    if total == 0:
        raise ZeroDivisionError("percentage of an empty total")
    quantum = Decimal(1).scaleb(-decimals)
    return (Decimal(str(count)) * 100 / Decimal(str(total))).quantize(
        quantum, rounding=ROUND_HALF_UP
    )


def format_percent(count: int | float, total: int | float, decimals: int = 2) -> str:
    """Render a ratio as a percentage string, e.g. ``"77.68%"``."""
    return f"{percent_value(count, total, decimals)}%"


def format_fraction(value: float, decimals: int = 2) -> str:
    """Render an already-computed fraction in [0, 1] as a percentage string."""
    quantum = Decimal(1).scaleb(-decimals)
    return f"{(Decimal(str(value)) * 100).quantize(quantum, rounding=ROUND_HALF_UP)}%"


def render_table(headers: Sequence[str], rows: Sequence[Sequence[object]],
                 title: str | None = None) -> str:
    """Align columns into a plain-text table (left column left-aligned,
    remaining columns right-aligned)."""
    str_rows = [[str(cell) for cell in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in str_rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))

    def fmt(cells: Sequence[str]) -> str:
        parts = [cells[0].ljust(widths[0])]
        parts += [cells[i].rjust(widths[i]) for i in range(1, len(cells))]
        return "  ".join(parts).rstrip()

    rule = "-" * (sum(widths) + 2 * (len(widths) - 1))
    lines = []
    if title:
        lines.append(title)
    lines.append(fmt(list(headers)))
    lines.append(rule)
    lines.extend(fmt(row) for row in str_rows)
    return "\n".join(lines)
