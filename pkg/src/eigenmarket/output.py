"""Deterministic CSV/JSON serialization for report artifacts.

Numbers default to 6 significant digits (readable tables); full
precision switches to shortest round-trip decimals.  Files always use
LF newlines and UTF-8 so re-runs are byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable, Sequence


def fmt(value: Any, full_precision: bool = False) -> str:
    """Render one CSV cell."""
    if isinstance(value, float):
        return repr(value) if full_precision else f"{value:.6g}"
    return str(value)


def write_csv(
    path: str | Path,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    full_precision: bool = False,
) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(cell, full_precision) for cell in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _round_floats(obj: Any) -> Any:
    if isinstance(obj, float):
        return float(f"{obj:.6g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def write_json(path: str | Path, obj: Any, full_precision: bool = False) -> Path:
    path = Path(path)
    if not full_precision:
        obj = _round_floats(obj)
    path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")
    return path
