"""Loading ground truth from supported file formats plus summary statistics.

Formats (see README for full schemas):
  matrix_csv    header of feature names, then T rows of 0/1 cells
  temporal_csv  one 0/1 per line
  smd           values file (T lines of F comma-separated decimals) plus an
                interpretation-label file with one event per line,
                ``<start>-<end>:<d1>,<d2>,...`` (1-indexed, inclusive range)
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import EmptyInputError, ExtentError, FormatError, MissingDataError
from .model import GroundTruthMatrix, SummaryStats
from .validation import check_unique_names

MATRIX_CSV = "matrix_csv"
TEMPORAL_CSV = "temporal_csv"

_BINARY_CELLS = {"0": 0, "1": 1}


def _parse_binary_cell(cell: str, row: int, col: int) -> int:
    value = _BINARY_CELLS.get(cell.strip())
    if value is None:
        raise ValueError(f"non-binary value {cell.strip()!r} at row {row} col {col}")
    return value


def load_generic_gt(
    path: str | Path,
    schema: str,
    *,
    dataset_id: str | None = None,
    sampling_period: float = 60.0,
    strip_name_regex: str | None = None,
) -> GroundTruthMatrix:
    """Load a matrix_csv or temporal_csv label file.

    ``strip_name_regex`` optionally deletes a leading match from every feature
    name (for sources whose names carry device prefixes).
    Row/column positions in errors are 1-indexed over data rows.
    """
    path = Path(path)
    dataset_id = dataset_id if dataset_id is not None else path.stem
    text = path.read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip() != ""]
    if not lines:
        raise FormatError(f"{path}: empty file")

    if schema == TEMPORAL_CSV:
        values = [_parse_binary_cell(ln, i + 1, 1) for i, ln in enumerate(lines)]
        labels = np.asarray(values, dtype=np.uint8)
        return GroundTruthMatrix(dataset_id, sampling_period, labels)

    if schema != MATRIX_CSV:
        raise FormatError(f"unknown schema {schema!r}; expected matrix_csv or temporal_csv")

    reader = csv.reader(lines)
    header = next(reader)
    names = [name.strip() for name in header]
    if strip_name_regex:
        pattern = re.compile(strip_name_regex)
        names = [pattern.sub("", name, count=1) for name in names]
    feature_names = check_unique_names(names)
    n_features = len(feature_names)
    rows: list[list[int]] = []
    for i, cells in enumerate(reader, start=1):
        if len(cells) != n_features:
            raise FormatError(
                f"{path}: row {i} has {len(cells)} cells, expected {n_features}"
            )
        rows.append([_parse_binary_cell(c, i, j + 1) for j, c in enumerate(cells)])
    if not rows:
        raise FormatError(f"{path}: header only, no label rows")
    labels = np.asarray(rows, dtype=np.uint8)
    return GroundTruthMatrix(dataset_id, sampling_period, labels, feature_names)


def write_matrix_csv(gt: GroundTruthMatrix, path: str | Path) -> None:
    """Export spatio-temporal labels in the matrix_csv schema (round-trip safe)."""
    if not gt.is_spatiotemporal:
        raise ExtentError(f"dataset {gt.dataset_id!r} is temporal-only; use write_temporal_csv")
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(gt.feature_names)
        for row in gt.labels:
            writer.writerow([str(int(v)) for v in row])


def write_temporal_csv(gt: GroundTruthMatrix, path: str | Path) -> None:
    """Export the temporal label vector, one 0/1 per line."""
    vector = gt.temporal_vector()
    Path(path).write_text("".join(f"{int(v)}\n" for v in vector), encoding="utf-8")


@dataclass(frozen=True)
class InterpretationLine:
    """One raw event line of an SMD-style interpretation-label file (1-indexed)."""

    start: int
    end: int
    features: tuple[int, ...]


_LINE_RE = re.compile(r"^\s*(\d+)\s*-\s*(\d+)\s*:\s*(.+?)\s*$")


def read_interpretation_lines(path: str | Path) -> list[InterpretationLine]:
    """Parse ``<start>-<end>:<d1>,<d2>,...`` lines; blank lines are skipped."""
    out: list[InterpretationLine] = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not raw.strip():
            continue
        m = _LINE_RE.match(raw)
        if m is None:
            raise FormatError(f"{path}: line {lineno} does not match '<start>-<end>:<dims>'")
        try:
            features = tuple(int(tok) for tok in m.group(3).split(","))
        except ValueError as exc:
            raise FormatError(f"{path}: line {lineno} has a non-integer feature index") from exc
        start, end = int(m.group(1)), int(m.group(2))
        if start > end:
            raise FormatError(f"{path}: line {lineno} has start {start} > end {end}")
        out.append(InterpretationLine(start, end, features))
    return out


def rasterize_interpretation(
    lines: list[InterpretationLine], n_samples: int, n_features: int
) -> np.ndarray:
    """Turn 1-indexed inclusive event lines into a T x F 0/1 matrix (overlaps OR-merge)."""
    labels = np.zeros((n_samples, n_features), dtype=np.uint8)
    for line in lines:
        if line.start < 1 or line.end > n_samples:
            raise IndexError(
                f"range {line.start}-{line.end} outside 1..{n_samples}"
            )
        for j in line.features:
            if j < 1 or j > n_features:
                raise IndexError(f"feature index {j} outside 1..{n_features}")
            # 1-indexed inclusive -> 0-indexed half-open, centralized here.
            labels[line.start - 1 : line.end, j - 1] = 1
    return labels


def load_smd_dataset(
    values_path: str | Path,
    interpretation_path: str | Path,
    n_features: int,
    n_samples: int,
    *,
    dataset_id: str | None = None,
    sampling_period: float = 60.0,
) -> GroundTruthMatrix:
    """Load one SMD-convention dataset: telemetry values plus interpretation labels."""
    values_path = Path(values_path)
    dataset_id = dataset_id if dataset_id is not None else values_path.stem
    values = np.loadtxt(values_path, delimiter=",", dtype=np.float64, ndmin=2)
    if values.shape != (n_samples, n_features):
        raise FormatError(
            f"{values_path}: shape {values.shape} != declared ({n_samples}, {n_features})"
        )
    lines = read_interpretation_lines(interpretation_path)
    labels = rasterize_interpretation(lines, n_samples, n_features)
    feature_names = tuple(f"kpi_{j + 1}" for j in range(n_features))
    return GroundTruthMatrix(dataset_id, sampling_period, labels, feature_names, values)


def summarize(values) -> SummaryStats:
    """Order-statistic median and unscaled MAD of a non-empty collection."""
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        raise EmptyInputError("cannot summarize an empty collection")
    med = float(np.median(arr))
    mad = float(np.median(np.abs(arr - med)))
    return SummaryStats(med, mad)


def top_variation_kpis(
    gt: GroundTruthMatrix,
    window: tuple[int, int],
    k: int,
    restrict_to_gt: bool = False,
) -> list[str]:
    """The k feature names with the largest sample stddev over ``window``.

    ``window`` is a half-open (start, stop) sample range. Constant features
    rank last; ties break by column order. With ``restrict_to_gt``, candidates
    are limited to features anomalous in the ground truth during the window.
    """
    if gt.kpi_values is None:
        raise MissingDataError(f"dataset {gt.dataset_id!r} has no kpi_values")
    start, stop = int(window[0]), int(window[1])
    if not (0 <= start < stop <= gt.n_samples):
        raise ValueError(f"window {window} outside [0, {gt.n_samples})")
    if restrict_to_gt and not gt.is_spatiotemporal:
        raise ExtentError("restrict_to_gt requires spatio-temporal ground truth")

    values = gt.kpi_values[start:stop]
    if values.ndim == 1:
        values = values.reshape(-1, 1)
    n = stop - start
    stddev = values.std(axis=0, ddof=1) if n > 1 else np.zeros(values.shape[1])
    candidates = np.arange(values.shape[1])
    if restrict_to_gt:
        anomalous = gt.labels[start:stop].any(axis=0)
        candidates = candidates[anomalous[candidates]]
    # Constant columns sort after all varying ones; stable sort keeps column order on ties.
    sort_key = np.where(stddev[candidates] > 0, -stddev[candidates], np.inf)
    order = candidates[np.argsort(sort_key, kind="stable")]
    if gt.feature_names is not None:
        return [gt.feature_names[j] for j in order[:k]]
    return [f"col_{j + 1}" for j in order[:k]]
