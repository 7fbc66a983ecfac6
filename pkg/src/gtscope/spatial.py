"""Spatial footprints: the binary event-by-feature matrix and its statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateInputError, ExtentError
from .model import SPATIO_TEMPORAL, AnomalousEvent, DataSource
from .temporal import extract_events, source_timelines


@dataclass(frozen=True)
class FootprintMatrix:
    """Binary N x F matrix over the one-hot union of feature names.

    Rows are events (in dataset order, then start order); entry (i, j) is 1
    iff event i's footprint contains union feature j. Events with empty
    footprints are excluded from the matrix and counted in ``n_excluded``.
    """

    matrix: np.ndarray
    feature_names: tuple[str, ...]
    events: tuple[AnomalousEvent, ...]
    n_excluded: int = 0

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=np.uint8).copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2:
            raise ValueError(f"matrix must be 2-D, got shape {m.shape}")
        if m.shape[0] != len(self.events):
            raise ValueError(f"{m.shape[0]} rows for {len(self.events)} events")
        if m.shape[1] != len(self.feature_names):
            raise ValueError(f"{m.shape[1]} columns for {len(self.feature_names)} names")
        if m.shape[0] and not m.any(axis=1).all():
            raise ValueError("footprint matrix contains an all-zero row")

    @property
    def n_events(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def n_union_features(self) -> int:
        return int(self.matrix.shape[1])

    def kpi_counts(self) -> np.ndarray:
        """Set-bit count per row (anomalous KPIs per event)."""
        return self.matrix.sum(axis=1).astype(np.int64)


def feature_counts_by_dataset(source: DataSource) -> dict[str, int]:
    """Number of features per dataset id (spatio-temporal sources only)."""
    if source.gt_extent != SPATIO_TEMPORAL:
        raise ExtentError(f"source {source.name!r} has temporal-only ground truth")
    return {ds.dataset_id: int(ds.n_features or 0) for ds in source.datasets}


def build_footprint_matrix(source: DataSource) -> FootprintMatrix:
    """One row per event across all datasets, columns the sorted union of names."""
    if source.gt_extent != SPATIO_TEMPORAL:
        raise ExtentError(f"source {source.name!r} has temporal-only ground truth")
    union: set[str] = set()
    for ds in source.datasets:
        union.update(ds.feature_names or ())
    columns = tuple(sorted(union))
    col_index = {name: j for j, name in enumerate(columns)}

    rows: list[np.ndarray] = []
    kept: list[AnomalousEvent] = []
    n_excluded = 0
    for ds in source.datasets:
        names = ds.feature_names or ()
        for ev in extract_events(ds).events:
            if not ev.footprint:
                n_excluded += 1
                continue
            row = np.zeros(len(columns), dtype=np.uint8)
            for j in ev.footprint:
                row[col_index[names[j]]] = 1
            rows.append(row)
            kept.append(ev)
    matrix = (
        np.vstack(rows) if rows else np.zeros((0, len(columns)), dtype=np.uint8)
    )
    return FootprintMatrix(matrix, columns, tuple(kept), n_excluded)


@dataclass(frozen=True)
class FootprintStats:
    """Per-event footprint sizes and the share of univariate events."""

    kpi_counts: tuple[int, ...]
    kpi_percentages: tuple[float, ...]  # fraction of the event's own dataset F
    univariate_fraction: float


def footprint_stats(fm: FootprintMatrix, per_dataset_features: dict[str, int]) -> FootprintStats:
    """Footprint size and per-dataset-normalized percentage for every event.

    Raises KeyError when an event's dataset has no entry in the map.
    """
    counts = fm.kpi_counts()
    percentages = []
    for ev, count in zip(fm.events, counts):
        n_features = per_dataset_features[ev.dataset_id]
        percentages.append(count / n_features)
    univariate = float((counts == 1).mean()) if counts.size else 0.0
    return FootprintStats(
        tuple(int(c) for c in counts), tuple(percentages), univariate
    )


def duration_footprint_correlation(source: DataSource) -> float:
    """Pearson correlation between event duration and footprint size."""
    durations: list[float] = []
    counts: list[int] = []
    for tl in source_timelines(source):
        for ev in tl.events:
            if ev.footprint:
                durations.append(ev.duration_seconds)
                counts.append(len(ev.footprint))
    x = np.asarray(durations, dtype=np.float64)
    y = np.asarray(counts, dtype=np.float64)
    if x.size < 2:
        raise DegenerateInputError(f"need >= 2 events with footprints, got {x.size}")
    if x.std() == 0 or y.std() == 0:
        raise DegenerateInputError("zero variance in duration or footprint size")
    return float(np.corrcoef(x, y)[0, 1])
