"""Event extraction and duration/interarrival characterization.

Events are maximal runs of anomalous samples on the per-sample OR of the
label matrix; interarrivals are the normal gaps between consecutive events
of the same dataset and are never computed across datasets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError
from .model import AnomalousEvent, DataSource, EventTimeline, GroundTruthMatrix

#: Default log-spaced duration bin edges, in seconds (powers of 10).
DEFAULT_DURATION_BINS = tuple(float(10**p) for p in range(0, 9))


def find_runs(vector: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of 1s as inclusive (start, end) pairs.

    Out-of-range neighbors count as 0, so runs may touch either boundary.
    """
    v = np.asarray(vector, dtype=np.int8)
    if v.ndim != 1:
        raise ParameterError(f"expected a vector, got shape {v.shape}")
    if v.size == 0:
        return []
    edges = np.diff(np.concatenate(([0], v, [0])))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    return list(zip(starts.tolist(), ends.tolist()))


def extract_events(gt: GroundTruthMatrix) -> EventTimeline:
    """Extract the dataset's anomalous events, with spatial footprints when available."""
    vector = gt.temporal_vector()
    events = []
    for start, end in find_runs(vector):
        if gt.is_spatiotemporal:
            footprint = frozenset(np.flatnonzero(gt.labels[start : end + 1].any(axis=0)).tolist())
        else:
            footprint = frozenset()
        events.append(
            AnomalousEvent(gt.dataset_id, start, end, gt.sampling_period, footprint)
        )
    return EventTimeline(gt.dataset_id, gt.n_samples, tuple(events))


def interarrivals(timeline: EventTimeline) -> np.ndarray:
    """Gaps ``start_i - end_{i-1}`` between consecutive events, in samples."""
    if len(timeline.events) < 2:
        return np.zeros(0, dtype=np.int64)
    starts = np.array([ev.start for ev in timeline.events], dtype=np.int64)
    ends = np.array([ev.end for ev in timeline.events], dtype=np.int64)
    return starts[1:] - ends[:-1]


def source_timelines(source: DataSource) -> list[EventTimeline]:
    """Event timelines for every dataset in a source, in dataset order."""
    return [extract_events(ds) for ds in source.datasets]


def _all_durations_seconds(source: DataSource) -> np.ndarray:
    durations = [
        ev.duration_seconds for tl in source_timelines(source) for ev in tl.events
    ]
    return np.asarray(durations, dtype=np.float64)


@dataclass(frozen=True)
class DurationHistogram:
    """Per-source event-duration counts over shared log-spaced bins (seconds)."""

    bin_edges: tuple[float, ...]
    counts: dict[str, np.ndarray]
    durations: dict[str, np.ndarray]

    def fraction_below(self, source_name: str, threshold_seconds: float) -> float:
        """Share of the source's events shorter than the threshold (exact, unbinned)."""
        durations = self.durations[source_name]
        if durations.size == 0:
            return 0.0
        return float((durations < threshold_seconds).mean())


def duration_histogram(
    sources: list[DataSource], bins: tuple[float, ...] = DEFAULT_DURATION_BINS
) -> DurationHistogram:
    """Bin event durations per source; bins are [lo, hi) except the last, which is closed."""
    edges = np.asarray(bins, dtype=np.float64)
    if edges.ndim != 1 or edges.size < 2 or not np.all(np.diff(edges) > 0):
        raise ParameterError("bins must be a strictly increasing sequence of >= 2 edges")
    counts: dict[str, np.ndarray] = {}
    durations: dict[str, np.ndarray] = {}
    for source in sources:
        d = _all_durations_seconds(source)
        counts[source.name], _ = np.histogram(d, bins=edges)
        durations[source.name] = d
    return DurationHistogram(tuple(edges.tolist()), counts, durations)


@dataclass(frozen=True)
class ScatterRow:
    """One event with a predecessor: its interarrival and its own duration."""

    source: str
    dataset_id: str
    interarrival_seconds: float
    duration_seconds: float


@dataclass(frozen=True)
class InterarrivalScatter:
    rows: tuple[ScatterRow, ...]
    median_interarrival_seconds: dict[str, float]


def interarrival_duration_scatter(sources: list[DataSource]) -> InterarrivalScatter:
    """Per-event (interarrival, duration) pairs plus per-source median interarrival.

    The duration is that of the later event of each consecutive pair; pairs
    never span datasets.
    """
    rows: list[ScatterRow] = []
    medians: dict[str, float] = {}
    for source in sources:
        gaps_s: list[float] = []
        for tl in source_timelines(source):
            gaps = interarrivals(tl)
            period = tl.events[0].sampling_period if tl.events else 0.0
            for gap, ev in zip(gaps, tl.events[1:]):
                gap_s = float(gap) * period
                gaps_s.append(gap_s)
                rows.append(ScatterRow(source.name, tl.dataset_id, gap_s, ev.duration_seconds))
        medians[source.name] = float(np.median(gaps_s)) if gaps_s else float("nan")
    return InterarrivalScatter(tuple(rows), medians)


def is_spike(event: AnomalousEvent) -> bool:
    """True iff the event lasts exactly one sample."""
    return event.duration_samples == 1
