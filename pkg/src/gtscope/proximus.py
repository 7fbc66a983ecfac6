"""Recursive rank-one binary clustering with dominant-pattern labels.

The clusterer recursively approximates the binary event-by-feature matrix by
dense rank-one submatrices. Each accepted cluster is labeled by a dominant
pattern (a binary feature vector); rows that fit no valid cluster under the
radius/size constraints collect in the rag bag.

All tie rules are fixed so identical inputs yield identical clusterings:
the seed is the densest not-yet-covered row (lowest index on ties), rows
join a pattern only on strict benefit, and pattern bits need a strict
member majority.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import ParameterError
from .model import AnomalousEvent
from .spatial import FootprintMatrix
from .temporal import is_spike
from .validation import check_binary_matrix, check_range

MAX_ALTERNATION_ROUNDS = 100


@dataclass(frozen=True)
class ClusteringParams:
    """Clustering constraints: maximum member-to-pattern Hamming radius and minimum size."""

    max_radius: int
    min_size: int

    def validate(self, n_rows: int, n_features: int) -> None:
        check_range(self.max_radius, 0, n_features, "max_radius")
        check_range(self.min_size, 1, n_rows, "min_size")


@dataclass(frozen=True)
class Cluster:
    """A cluster: its dominant pattern, member row indices and dispersion."""

    dominant_pattern: np.ndarray
    member_rows: tuple[int, ...]
    mean_dispersion: float
    rank: int

    def __post_init__(self) -> None:
        pattern = np.asarray(self.dominant_pattern, dtype=np.uint8).copy()
        pattern.flags.writeable = False
        object.__setattr__(self, "dominant_pattern", pattern)
        object.__setattr__(self, "member_rows", tuple(int(i) for i in self.member_rows))
        if not pattern.any():
            raise ValueError("a cluster's dominant pattern must have at least one set bit")
        if not self.member_rows:
            raise ValueError("a cluster must have at least one member")

    @property
    def size(self) -> int:
        return len(self.member_rows)


@dataclass(frozen=True)
class Clustering:
    """Clusters ranked by decreasing size plus the rag bag; together they partition rows."""

    clusters: tuple[Cluster, ...]
    rag_bag: tuple[int, ...]
    params: ClusteringParams
    total_error: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "clusters", tuple(self.clusters))
        object.__setattr__(self, "rag_bag", tuple(sorted(int(i) for i in self.rag_bag)))

    @property
    def n_rows(self) -> int:
        return sum(c.size for c in self.clusters) + len(self.rag_bag)

    @property
    def cluster_sizes(self) -> tuple[int, ...]:
        return tuple(c.size for c in self.clusters)

    def labels(self) -> np.ndarray:
        """Per-row cluster index in rank order; rag-bag rows get -1."""
        out = np.full(self.n_rows, -1, dtype=np.int64)
        for k, cluster in enumerate(self.clusters):
            out[list(cluster.member_rows)] = k
        return out


def approximation_error(M: np.ndarray, membership: np.ndarray, pattern: np.ndarray) -> int:
    """Squared Frobenius error of the rank-one approximation membership x pattern."""
    M = np.asarray(M, dtype=np.int64)
    u = np.asarray(membership, dtype=bool)
    p = np.asarray(pattern, dtype=np.int64)
    inside = np.abs(M[u] - p).sum() if u.any() else 0
    outside = M[~u].sum()
    return int(inside + outside)


def _hamming_to_pattern(M: np.ndarray, pattern: np.ndarray) -> np.ndarray:
    return np.abs(M.astype(np.int64) - pattern.astype(np.int64)).sum(axis=1)


#: Row counts up to which the rank-one step enumerates memberships exactly.
EXACT_SEARCH_MAX_ROWS = 10

_MEMBERSHIP_BITS: dict[int, np.ndarray] = {}


def rank_one_approximate(
    M: np.ndarray, init: int | str = "densest"
) -> tuple[np.ndarray, np.ndarray]:
    """Rank-one approximation of a binary matrix by alternating optimization.

    The returned ``(pattern, membership)`` pair is a fixed point of the
    alternating updates: a row is a member only when that strictly lowers the
    error (ties stay out) and a pattern bit is set only on a strict member
    majority (ties stay sparse). Membership is never empty and the pattern
    never all-zero.

    For matrices of up to ``EXACT_SEARCH_MAX_ROWS`` rows the optimal
    membership is found by exhaustive enumeration (the per-membership error
    is column-separable, so this is cheap) and then canonicalized by the
    alternating updates, which cannot leave the optimal objective; plain
    alternation alone stalls on plateau ties often enough to miss the global
    optimum even on 6x5 inputs. Larger matrices run alternation from the
    seed row followed by a deterministic single-row descent polish.

    ``init`` is ``"densest"`` (seed with the densest row, lowest index on
    ties) or an explicit row index, which must name a nonzero row. Inputs
    small enough for the exact path return the same optimum for every init.
    """
    M = check_binary_matrix(M, name="M")
    work = M.astype(np.int64)
    row_weights = work.sum(axis=1)

    if init == "densest":
        seed = int(np.argmax(row_weights))
    else:
        seed = int(init)
        if not 0 <= seed < M.shape[0]:
            raise ParameterError(f"init row {seed} outside [0, {M.shape[0]})")
        if row_weights[seed] == 0:
            raise ParameterError(f"init row {seed} is all-zero")

    pattern, membership = _rank_one_core(work, seed)
    return pattern.astype(np.uint8), membership.astype(np.uint8)


def _rank_one_core(work: np.ndarray, seed: int) -> tuple[np.ndarray, np.ndarray]:
    if work.shape[0] <= EXACT_SEARCH_MAX_ROWS:
        return _rank_one_exact(work)
    pattern, membership = _alternate(work, work[seed].copy())
    polished = _toggle_polish(work, membership)
    if not np.array_equal(polished, membership):
        refined = _majority_pattern(work, polished)
        if refined.any():
            pattern, membership = _alternate(work, refined)
    return pattern, membership


def _alternate(work: np.ndarray, pattern: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Alternating updates from a nonzero start pattern to a fixed point."""
    membership = np.zeros(work.shape[0], dtype=bool)
    for _ in range(MAX_ALTERNATION_ROUNDS):
        new_membership = 2 * (work @ pattern) > pattern.sum()
        if not new_membership.any():  # unreachable once the seed joined; defensive
            break
        membership = new_membership
        new_pattern = _majority_pattern(work, membership)
        if not new_pattern.any():  # defensive: majority of nonzero members has a bit
            break
        if np.array_equal(new_pattern, pattern):
            break
        pattern = new_pattern
    return pattern, membership


def _majority_pattern(work: np.ndarray, membership: np.ndarray) -> np.ndarray:
    column_sums = work[membership].sum(axis=0)
    return (2 * column_sums > membership.sum()).astype(np.int64)


def _membership_bits(n_rows: int) -> np.ndarray:
    """All nonempty memberships over n_rows rows as a (2**n - 1, n) 0/1 matrix."""
    cached = _MEMBERSHIP_BITS.get(n_rows)
    if cached is None:
        codes = np.arange(1, 2**n_rows, dtype=np.uint32)
        cached = ((codes[:, None] >> np.arange(n_rows)) & 1).astype(np.int64)
        _MEMBERSHIP_BITS[n_rows] = cached
    return cached


def _rank_one_exact(work: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Globally optimal pair via membership enumeration, then canonicalized."""
    candidates = _membership_bits(work.shape[0])
    inside_sums = candidates @ work
    sizes = candidates.sum(axis=1)
    inside = np.minimum(inside_sums, sizes[:, None] - inside_sums).sum(axis=1)
    row_mass = work.sum(axis=1)
    outside = row_mass.sum() - candidates @ row_mass
    best = int(np.argmin(inside + outside))  # first optimum: lowest bit code
    membership = candidates[best].astype(bool)
    pattern = _majority_pattern(work, membership)
    # A strict-majority pattern of the optimal membership is never all-zero,
    # and re-alternating from the optimum cannot leave its objective.
    return _alternate(work, pattern)


def _toggle_polish(work: np.ndarray, membership: np.ndarray) -> np.ndarray:
    """Steepest single-row membership toggles while they strictly reduce error."""
    row_mass = work.sum(axis=1)
    membership = membership.copy()
    for _ in range(MAX_ALTERNATION_ROUNDS):
        inside_sums = work[membership].sum(axis=0)
        size = int(membership.sum())
        base = int(np.minimum(inside_sums, size - inside_sums).sum()) + int(
            row_mass[~membership].sum()
        )
        step = np.where(membership, -1, 1)
        toggled_sums = inside_sums[None, :] + step[:, None] * work
        toggled_size = size + step
        inside = np.minimum(toggled_sums, toggled_size[:, None] - toggled_sums).sum(axis=1)
        outside = int(row_mass[~membership].sum()) + step * -row_mass
        errors = inside + outside
        errors[toggled_size == 0] = np.iinfo(np.int64).max
        best = int(np.argmin(errors))
        if errors[best] >= base:
            break
        membership[best] = ~membership[best]
    return membership


def cluster_rows(K: np.ndarray, params: ClusteringParams) -> Clustering:
    """Cluster the rows of a binary matrix under radius/size constraints.

    Rows are recursively partitioned by the rank-one step into members and
    remainder. A member set where every row lies within ``max_radius`` bits
    of the pattern and that has at least ``min_size`` rows is accepted as a
    cluster; non-compliant member sets are recursed while they keep
    splitting. A set the rank-one step can no longer split that still
    violates the constraints yields no valid pattern and drains into the
    rag bag, so tightening the constraints grows the rag bag rather than
    forcing degenerate clusters.
    """
    K = check_binary_matrix(K, name="K")
    n_rows, n_features = K.shape
    params.validate(n_rows, n_features)
    full = K.astype(np.int64)

    accepted: list[tuple[np.ndarray, np.ndarray]] = []
    rag: list[int] = []
    work: list[np.ndarray] = [np.arange(n_rows)]
    while work:
        idx = work.pop()
        if idx.size < params.min_size:
            rag.extend(int(i) for i in idx)
            continue
        sub = full[idx]
        row_weights = sub.sum(axis=1)
        if not row_weights.any():  # all-zero rows can never carry a valid pattern
            rag.extend(int(i) for i in idx)
            continue
        pattern, member_mask = _rank_one_core(sub, int(np.argmax(row_weights)))
        members = idx[member_mask]
        rest = idx[~member_mask]
        distances = _hamming_to_pattern(sub[member_mask], pattern)
        compliant = distances.max() <= params.max_radius and members.size >= params.min_size
        if rest.size == 0:
            # Unsplittable set: accept it whole or declare no valid pattern.
            if compliant:
                accepted.append((pattern, members))
            else:
                rag.extend(int(i) for i in members)
        elif compliant:
            accepted.append((pattern, members))
            work.append(rest)
        elif distances.max() <= params.max_radius:
            # Tight but too small: no subset can ever reach min_size.
            rag.extend(int(i) for i in members)
            work.append(rest)
        else:
            work.append(members)
            work.append(rest)

    ordered = sorted(
        accepted, key=lambda item: (-item[1].size, tuple(item[0].tolist()))
    )
    clusters = []
    total_error = 0
    for rank, (pattern, members) in enumerate(ordered, start=1):
        distances = _hamming_to_pattern(K[members], pattern)
        total_error += int(distances.sum())
        clusters.append(
            Cluster(pattern, tuple(sorted(int(i) for i in members)), float(distances.mean()), rank)
        )
    return Clustering(tuple(clusters), tuple(rag), params, float(total_error))


def cluster_footprints(fm: FootprintMatrix, params: ClusteringParams) -> Clustering:
    """Cluster a footprint matrix's rows (events) by their spatial footprint."""
    return cluster_rows(fm.matrix, params)


@dataclass(frozen=True)
class ClusterSummary:
    """Per-cluster annotations: pattern, dispersion, footprint and duration stats."""

    rank: int
    size: int
    size_fraction: float
    pattern_length: int
    mean_dispersion: float
    median_kpi_count: float
    univariate_fraction: float
    median_duration_seconds: float
    spike_fraction: float


def cluster_summary(cluster: Cluster, events: Sequence[AnomalousEvent]) -> ClusterSummary:
    """Summarize one cluster against the events backing the footprint rows."""
    members = [events[i] for i in cluster.member_rows]
    kpi_counts = np.array([len(ev.footprint) for ev in members], dtype=np.float64)
    durations = np.array([ev.duration_seconds for ev in members], dtype=np.float64)
    return ClusterSummary(
        rank=cluster.rank,
        size=cluster.size,
        size_fraction=cluster.size / len(events),
        pattern_length=int(cluster.dominant_pattern.sum()),
        mean_dispersion=cluster.mean_dispersion,
        median_kpi_count=float(np.median(kpi_counts)),
        univariate_fraction=float((kpi_counts == 1).mean()),
        median_duration_seconds=float(np.median(durations)),
        spike_fraction=float(np.mean([is_spike(ev) for ev in members])),
    )


class ProximusClustering(ClusterMixin, BaseEstimator):
    """Binary clustering estimator over 0/1 feature-footprint matrices.

    Parameters
    ----------
    max_radius : int, default=0
        Largest allowed Hamming distance between a member and its cluster's
        dominant pattern.
    min_size : int, default=1
        Smallest allowed number of members in a cluster.

    Attributes
    ----------
    labels_ : ndarray of shape (n_samples,)
        Cluster index per row in decreasing-size rank order; -1 marks the
        rag bag.
    clustering_ : Clustering
        Full structured result (clusters, rag bag, total error).
    """

    def __init__(self, max_radius: int = 0, min_size: int = 1):
        self.max_radius = max_radius
        self.min_size = min_size

    def fit(self, X, y=None):
        X = check_array(X, dtype=None)
        X = check_binary_matrix(X, name="X")
        clustering = cluster_rows(X, ClusteringParams(self.max_radius, self.min_size))
        self.n_features_in_ = X.shape[1]
        self.clustering_ = clustering
        self.clusters_ = clustering.clusters
        self.rag_bag_ = np.asarray(clustering.rag_bag, dtype=np.int64)
        self.total_error_ = clustering.total_error
        self.labels_ = clustering.labels()
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_

    def patterns(self) -> np.ndarray:
        """Dominant patterns stacked in rank order, shape (n_clusters, n_features)."""
        check_is_fitted(self, "clustering_")
        if not self.clusters_:
            return np.zeros((0, self.n_features_in_), dtype=np.uint8)
        return np.vstack([c.dominant_pattern for c in self.clusters_])
