"""Hyperparameter grid search with lexicographic winner selection.

Every (max_radius, min_size) pair in the grid is clustered; the winner
minimizes, in order: rag-bag size, total approximation error, max_radius,
min_size. The full grid is retained for audit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array

from .exceptions import ParameterError
from .proximus import Clustering, ClusteringParams, cluster_rows
from .spatial import FootprintMatrix
from .validation import check_binary_matrix


@dataclass(frozen=True)
class GridResult:
    """One grid cell: its parameters, selection keys and full clustering."""

    params: ClusteringParams
    rag_bag_size: int
    total_error: float
    n_clusters: int
    clustering: Clustering

    def sort_key(self) -> tuple[int, float, int, int]:
        return (
            self.rag_bag_size,
            self.total_error,
            self.params.max_radius,
            self.params.min_size,
        )


def _as_matrix(fm) -> np.ndarray:
    if isinstance(fm, FootprintMatrix):
        return fm.matrix
    return np.asarray(fm)


def _resolve_values(
    values: Iterable[int] | None, lo: int, hi: int, stride: int, label: str
) -> list[int]:
    if stride < 1:
        raise ParameterError(f"{label} stride must be >= 1, got {stride}")
    if values is None:
        out = list(range(lo, hi + 1, stride))
    else:
        # Explicit values are taken as-is; strides only thin the default grid.
        out = sorted({int(v) for v in values})
    if not out:
        raise ParameterError(f"{label} range is empty")
    for v in out:
        if not lo <= v <= hi:
            raise ParameterError(f"{label} value {v} outside [{lo}, {hi}]")
    return out


def _evaluate_cell(K: np.ndarray, params: ClusteringParams) -> GridResult:
    clustering = cluster_rows(K, params)
    return GridResult(
        params=params,
        rag_bag_size=len(clustering.rag_bag),
        total_error=clustering.total_error,
        n_clusters=len(clustering.clusters),
        clustering=clustering,
    )


def grid_search(
    fm,
    radius_values: Iterable[int] | None = None,
    size_values: Iterable[int] | None = None,
    *,
    radius_stride: int = 1,
    size_stride: int = 1,
    n_jobs: int | None = None,
) -> tuple[GridResult, list[GridResult]]:
    """Evaluate every (max_radius, min_size) pair; return (winner, full grid).

    ``None`` ranges mean the full legal range: radius 0..n_features and
    size 1..n_rows. Strides subsample the default ranges for large inputs.
    """
    K = check_binary_matrix(_as_matrix(fm), name="footprint matrix")
    n_rows, n_features = K.shape
    radii = _resolve_values(radius_values, 0, n_features, radius_stride, "max_radius")
    sizes = _resolve_values(size_values, 1, n_rows, size_stride, "min_size")

    cells = [ClusteringParams(r, s) for r in radii for s in sizes]
    if n_jobs in (None, 1):
        results = [_evaluate_cell(K, params) for params in cells]
    else:
        results = Parallel(n_jobs=n_jobs)(
            delayed(_evaluate_cell)(K, params) for params in cells
        )
    best = min(results, key=GridResult.sort_key)
    return best, results


class ProximusGridSearch(BaseEstimator):
    """Estimator wrapper around the clustering grid search.

    Parameters mirror :func:`grid_search`; after ``fit`` the winning
    clustering's labels are exposed sklearn-style.

    Attributes
    ----------
    best_result_ : GridResult
    best_params_ : dict with the winning max_radius and min_size
    results_ : list of GridResult over the whole grid
    labels_ : ndarray, winner's per-row cluster labels (-1 = rag bag)
    """

    def __init__(
        self,
        radius_values: Sequence[int] | None = None,
        size_values: Sequence[int] | None = None,
        radius_stride: int = 1,
        size_stride: int = 1,
        n_jobs: int | None = None,
    ):
        self.radius_values = radius_values
        self.size_values = size_values
        self.radius_stride = radius_stride
        self.size_stride = size_stride
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        X = check_array(X, dtype=None)
        best, results = grid_search(
            X,
            self.radius_values,
            self.size_values,
            radius_stride=self.radius_stride,
            size_stride=self.size_stride,
            n_jobs=self.n_jobs,
        )
        self.n_features_in_ = X.shape[1]
        self.best_result_ = best
        self.best_params_ = {
            "max_radius": best.params.max_radius,
            "min_size": best.params.min_size,
        }
        self.results_ = results
        self.labels_ = best.clustering.labels()
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_
