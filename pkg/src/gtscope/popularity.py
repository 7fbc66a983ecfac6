"""Cluster popularity skew, Zipf reference envelope and active-labeling gain."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ParameterError
from .proximus import Clustering

TOP10_CAPPED = "top10_capped"
ALL_CLUSTERS_CAPPED = "all_clusters_capped"
GAIN_STRATEGIES = (TOP10_CAPPED, ALL_CLUSTERS_CAPPED)

#: Per-cluster cap range of the default gain curves.
DEFAULT_CAPS = tuple(range(1, 21))


@dataclass(frozen=True)
class PopularityProfile:
    """Cluster event-shares by rank with top-5/top-10 cumulative coverage."""

    ranked_shares: tuple[tuple[int, float], ...]
    top5_coverage: float
    top10_coverage: float


def popularity_profile(clustering: Clustering, n_events: int) -> PopularityProfile:
    """Event share of every cluster in rank order, shares normalized by ``n_events``."""
    if n_events <= 0:
        raise ParameterError(f"n_events must be positive, got {n_events}")
    if not clustering.clusters:
        raise ParameterError("clustering has no clusters to profile")
    shares = tuple(
        (cluster.rank, cluster.size / n_events) for cluster in clustering.clusters
    )
    values = [s for _, s in shares]
    return PopularityProfile(
        ranked_shares=shares,
        top5_coverage=float(sum(values[:5])),
        top10_coverage=float(sum(values[:10])),
    )


@dataclass(frozen=True)
class ZipfEnvelopeConfig:
    """Zipf reference curve plus multinomial simulation envelope settings."""

    catalog_size: int = 10
    alpha: float = 1.6
    n_events: int = 325
    n_replicates: int = 10_000
    confidence_levels: tuple[float, ...] = (0.95, 0.99)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.catalog_size < 1:
            raise ParameterError(f"catalog_size must be >= 1, got {self.catalog_size}")
        if self.alpha <= 0:
            raise ParameterError(f"alpha must be > 0, got {self.alpha}")
        if self.n_events < 1 or self.n_replicates < 1:
            raise ParameterError("n_events and n_replicates must be >= 1")
        for level in self.confidence_levels:
            if not 0 < level < 1:
                raise ParameterError(f"confidence level {level} outside (0, 1)")


@dataclass(frozen=True)
class ZipfEnvelope:
    """Analytic rank shares and per-rank empirical confidence bands."""

    reference_shares: np.ndarray
    bands: dict[float, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)


def zipf_reference_shares(catalog_size: int, alpha: float) -> np.ndarray:
    """Normalized k**(-alpha) shares for ranks 1..catalog_size."""
    ranks = np.arange(1, catalog_size + 1, dtype=np.float64)
    weights = ranks**-alpha
    return weights / weights.sum()


def zipf_envelope(cfg: ZipfEnvelopeConfig) -> ZipfEnvelope:
    """Reference Zipf shares plus simulated rank-frequency confidence bands.

    Each replicate draws ``n_events`` samples from the Zipf catalog and
    re-sorts the per-category frequencies descending (the rank-frequency
    convention), so bands reflect order statistics, not per-category counts.
    """
    shares = zipf_reference_shares(cfg.catalog_size, cfg.alpha)
    rng = np.random.default_rng(cfg.seed)
    counts = rng.multinomial(cfg.n_events, shares, size=cfg.n_replicates)
    ranked = -np.sort(-counts, axis=1) / cfg.n_events
    bands: dict[float, tuple[np.ndarray, np.ndarray]] = {}
    for level in cfg.confidence_levels:
        tail = (1.0 - level) / 2.0
        lo = np.quantile(ranked, tail, axis=0)
        hi = np.quantile(ranked, 1.0 - tail, axis=0)
        bands[level] = (lo, hi)
    return ZipfEnvelope(shares, bands)


@dataclass(frozen=True)
class GainPoint:
    """Labeling outcome at one per-cluster cap."""

    cap: int
    labels_used: int
    reduction_factor: float


@dataclass(frozen=True)
class GainCurve:
    strategy: str
    points: tuple[GainPoint, ...]


def gain_curve(
    clustering: Clustering,
    strategy: str,
    caps: tuple[int, ...] = DEFAULT_CAPS,
    *,
    label_rag_bag: bool = False,
) -> GainCurve:
    """Labeling-effort reduction when at most ``cap`` events per cluster are labeled.

    ``labels_used`` sums min(cluster size, cap) over the considered clusters
    (the 10 largest under top10_capped, all clusters otherwise); the
    reduction factor divides the total event count (rag bag included) by it.
    ``label_rag_bag`` adds rag-bag events to the labeling cost for a
    pessimistic bound; by default they are never labeled but stay in the
    denominator.
    """
    if strategy not in GAIN_STRATEGIES:
        raise ParameterError(f"strategy must be one of {GAIN_STRATEGIES}, got {strategy!r}")
    if not clustering.clusters:
        raise ParameterError("clustering has no clusters; gain is undefined")
    sizes = clustering.cluster_sizes
    considered = sizes[:10] if strategy == TOP10_CAPPED else sizes
    n_total = clustering.n_rows
    extra = len(clustering.rag_bag) if label_rag_bag else 0
    points = []
    for cap in caps:
        if cap < 1:
            raise ParameterError(f"caps must be >= 1, got {cap}")
        labels_used = sum(min(size, cap) for size in considered) + extra
        points.append(GainPoint(int(cap), labels_used, n_total / labels_used))
    return GainCurve(strategy, tuple(points))
