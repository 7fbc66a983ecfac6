"""Core data model: ground-truth matrices, data sources and anomalous events.

All types are immutable after construction (arrays are marked read-only) and
safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ExtentError
from .validation import as_binary_array, check_unique_names

TEMPORAL = "temporal"
SPATIO_TEMPORAL = "spatio-temporal"
GT_EXTENTS = (TEMPORAL, SPATIO_TEMPORAL)
GT_TYPES = ("controlled", "manual")


@dataclass(frozen=True)
class SummaryStats:
    """Median and (unscaled) median absolute deviation, in the input's units."""

    median: float
    mad: float

    def __post_init__(self) -> None:
        if self.mad < 0:
            raise ValueError(f"mad must be >= 0, got {self.mad}")


@dataclass(frozen=True)
class GroundTruthMatrix:
    """Binary anomaly labels for one dataset.

    Spatio-temporal ground truth is a T x F 0/1 matrix with one column per
    named feature; temporal-only ground truth is a length-T 0/1 vector with
    ``feature_names`` absent, so spatial operations fail fast instead of
    producing degenerate single-column footprints.
    """

    dataset_id: str
    sampling_period: float  # seconds per sample
    labels: np.ndarray
    feature_names: tuple[str, ...] | None = None
    kpi_values: np.ndarray | None = None

    def __post_init__(self) -> None:
        labels = as_binary_array(self.labels, name=f"labels[{self.dataset_id}]")
        object.__setattr__(self, "labels", labels)
        if self.sampling_period <= 0:
            raise ValueError(f"sampling_period must be positive, got {self.sampling_period}")
        if labels.ndim == 2:
            if self.feature_names is None:
                raise ValueError("spatio-temporal labels require feature_names")
            names = check_unique_names(self.feature_names)
            if len(names) != labels.shape[1]:
                raise ValueError(
                    f"{len(names)} feature names for {labels.shape[1]} label columns"
                )
            object.__setattr__(self, "feature_names", names)
        else:
            if self.feature_names is not None:
                raise ValueError("temporal-only labels must not carry feature_names")
        if self.kpi_values is not None:
            values = np.asarray(self.kpi_values, dtype=np.float64)
            if labels.ndim == 2 and values.shape != labels.shape:
                raise ValueError(
                    f"kpi_values shape {values.shape} != labels shape {labels.shape}"
                )
            if labels.ndim == 1 and (values.ndim < 1 or values.shape[0] != labels.shape[0]):
                raise ValueError(
                    f"kpi_values must have {labels.shape[0]} rows, got shape {values.shape}"
                )
            values = values.copy()
            values.flags.writeable = False
            object.__setattr__(self, "kpi_values", values)

    @property
    def n_samples(self) -> int:
        return int(self.labels.shape[0])

    @property
    def n_features(self) -> int | None:
        return int(self.labels.shape[1]) if self.labels.ndim == 2 else None

    @property
    def is_spatiotemporal(self) -> bool:
        return self.labels.ndim == 2

    def temporal_vector(self) -> np.ndarray:
        """Per-sample anomaly indicator: OR across features for matrix labels."""
        if self.labels.ndim == 2:
            return self.labels.any(axis=1).astype(np.uint8)
        return self.labels


@dataclass(frozen=True)
class DataSource:
    """A named collection of datasets sharing one ground-truth extent."""

    name: str
    datasets: tuple[GroundTruthMatrix, ...]
    gt_extent: str
    gt_type: str = "manual"

    def __post_init__(self) -> None:
        object.__setattr__(self, "datasets", tuple(self.datasets))
        if self.gt_extent not in GT_EXTENTS:
            raise ValueError(f"gt_extent must be one of {GT_EXTENTS}, got {self.gt_extent!r}")
        if self.gt_type not in GT_TYPES:
            raise ValueError(f"gt_type must be one of {GT_TYPES}, got {self.gt_type!r}")
        want_matrix = self.gt_extent == SPATIO_TEMPORAL
        for ds in self.datasets:
            if ds.is_spatiotemporal != want_matrix:
                raise ExtentError(
                    f"dataset {ds.dataset_id!r} does not match source extent {self.gt_extent!r}"
                )
        ids = [ds.dataset_id for ds in self.datasets]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate dataset ids in source {self.name!r}")


@dataclass(frozen=True)
class AnomalousEvent:
    """One maximal contiguous anomalous interval, sample-indexed inclusive."""

    dataset_id: str
    start: int
    end: int
    sampling_period: float
    footprint: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError(f"event start {self.start} > end {self.end}")
        if self.start < 0:
            raise ValueError(f"event start {self.start} < 0")
        object.__setattr__(self, "footprint", frozenset(int(j) for j in self.footprint))

    @property
    def duration_samples(self) -> int:
        return self.end - self.start + 1

    @property
    def duration_seconds(self) -> float:
        return self.duration_samples * self.sampling_period


@dataclass(frozen=True)
class EventTimeline:
    """Events of one dataset, ordered by start, pairwise separated by >=1 normal sample."""

    dataset_id: str
    total_samples: int
    events: tuple[AnomalousEvent, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "events", tuple(self.events))
        prev: AnomalousEvent | None = None
        for ev in self.events:
            if ev.dataset_id != self.dataset_id:
                raise ValueError(f"event dataset {ev.dataset_id!r} != timeline {self.dataset_id!r}")
            if ev.end >= self.total_samples:
                raise ValueError(f"event end {ev.end} >= total_samples {self.total_samples}")
            if prev is not None and ev.start <= prev.end + 1:
                raise ValueError(
                    f"events ({prev.start},{prev.end}) and ({ev.start},{ev.end}) "
                    "are not separated by a normal sample"
                )
            prev = ev

    def __len__(self) -> int:
        return len(self.events)
