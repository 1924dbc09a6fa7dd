"""Report serialisation helpers shared by the CLI and the HTTP service.

Both surfaces must emit byte-identical documents for the same inputs, so
all JSON goes through :func:`json_bytes` and all rounding through
:func:`round_half_up`.
"""

from __future__ import annotations

import json
from decimal import ROUND_HALF_UP, Decimal


def round_half_up(value: float, places: int = 2) -> float:
    """Round half away from zero at the given decimal place.

    Used for reported percentages; comparisons elsewhere stay on full
    precision.
    """
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def json_bytes(doc: dict) -> bytes:
    """Canonical JSON encoding: 2-space indent, stable key order as built."""
    return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def render_text_table(title: str, header: list[str],
                      rows: list[list[str]]) -> str:
    widths = [len(h) for h in header]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    def fmt(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    lines = [title, fmt(header), fmt(["-" * w for w in widths])]
    lines.extend(fmt(row) for row in rows)
    return "\n".join(lines) + "\n"
