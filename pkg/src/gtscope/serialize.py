"""Deterministic JSON/CSV serialization helpers.

Reports must be byte-identical across runs with the same inputs, so keys are
sorted, floats are normalized to 12 significant digits and no wall-clock
timestamps are ever embedded.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

SIGNIFICANT_DIGITS = 12


def round_float(x: float) -> float:
    """Normalize to 12 significant digits (keeps ints-as-floats exact)."""
    if x != x or x in (float("inf"), float("-inf")):
        return x
    return float(f"{x:.{SIGNIFICANT_DIGITS}g}")


def json_ready(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays and round floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [json_ready(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return round_float(float(obj))
    if isinstance(obj, float):
        return round_float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def dumps_canonical(obj: Any) -> str:
    """Stable JSON text: sorted keys, 2-space indent, trailing newline."""
    return json.dumps(json_ready(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path: str | Path, obj: Any) -> None:
    Path(path).write_text(dumps_canonical(obj), encoding="utf-8")


def format_number(value: Any) -> str:
    """CSV cell rendering: ints verbatim, floats at 12 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.{SIGNIFICANT_DIGITS}g}"
    return str(value)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(cell) for cell in row])
