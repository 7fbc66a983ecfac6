"""Random-labeling null model for shared KPIs between two events.

If two events each mark a uniform random subset of ``kpis_per_event`` KPIs
out of ``total_kpis``, the overlap size follows a hypergeometric law with
mean ``kpis_per_event**2 / total_kpis``. Exact integer combinatorics are
used for small universes and log-gamma evaluation beyond, so large KPI
counts cannot overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError

#: Largest universe handled with exact integer binomials; log-gamma beyond.
EXACT_LIMIT = 64


@dataclass(frozen=True)
class NullModelConfig:
    """Null-model universe: KPIs marked per event out of the total KPI count."""

    kpis_per_event: int
    total_kpis: int

    def __post_init__(self) -> None:
        if self.total_kpis < 1:
            raise ParameterError(f"total_kpis must be >= 1, got {self.total_kpis}")
        if not 0 <= self.kpis_per_event <= self.total_kpis:
            raise ParameterError(
                f"kpis_per_event must be in [0, {self.total_kpis}], got {self.kpis_per_event}"
            )


def _log_comb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def shared_kpi_pmf(cfg: NullModelConfig) -> np.ndarray:
    """P(overlap = l) for l in 0..kpis_per_event; infeasible l get exact zeros."""
    a, f = cfg.kpis_per_event, cfg.total_kpis
    pmf = np.zeros(a + 1, dtype=np.float64)
    exact = f <= EXACT_LIMIT
    denom = math.comb(f, a) if exact else _log_comb(f, a)
    for l in range(a + 1):
        if a - l > f - a:
            continue  # cannot pick a-l distinct non-shared KPIs
        if exact:
            pmf[l] = math.comb(a, l) * math.comb(f - a, a - l) / denom
        else:
            pmf[l] = math.exp(_log_comb(a, l) + _log_comb(f - a, a - l) - denom)
    return pmf


def expected_shared(cfg: NullModelConfig) -> float:
    """Mean overlap under random labeling: kpis_per_event**2 / total_kpis."""
    return cfg.kpis_per_event**2 / cfg.total_kpis


def monte_carlo_shared(cfg: NullModelConfig, trials: int, seed: int) -> np.ndarray:
    """Empirical overlap PMF from sampling pairs of uniform random subsets.

    Kept independent of the analytic formula so the two routes verify each
    other: subsets are drawn by rank-ordering uniform variates, never from a
    hypergeometric sampler.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    a, f = cfg.kpis_per_event, cfg.total_kpis
    counts = np.zeros(a + 1, dtype=np.int64)
    if a == 0:
        counts[0] = trials
        return counts / trials

    rng = np.random.default_rng(seed)
    chunk = max(1, min(trials, 200_000))
    remaining = trials
    while remaining > 0:
        n = min(chunk, remaining)
        first = _random_subsets(rng, n, f, a)
        second = _random_subsets(rng, n, f, a)
        overlap = (first & second).sum(axis=1)
        counts += np.bincount(overlap, minlength=a + 1)
        remaining -= n
    return counts / trials


def _random_subsets(rng: np.random.Generator, n: int, universe: int, size: int) -> np.ndarray:
    """n uniform size-subsets of range(universe) as boolean masks."""
    noise = rng.random((n, universe))
    picked = np.argpartition(noise, size - 1, axis=1)[:, :size]
    masks = np.zeros((n, universe), dtype=bool)
    np.put_along_axis(masks, picked, True, axis=1)
    return masks


def total_variation_distance(p: np.ndarray, q: np.ndarray) -> float:
    """0.5 * L1 distance between two PMFs over the same support."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ParameterError(f"PMF shapes differ: {p.shape} vs {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())
