"""gtscope: characterization of labeled multivariate time-series anomaly ground truth.

Loads labeled datasets, extracts anomalous events with their temporal and
spatial statistics, clusters spatial footprints with a recursive rank-one
binary clusterer (sklearn-compatible), checks the result against a
random-labeling null model, and quantifies active-labeling gain.
"""

from ._version import __version__
from .exceptions import (
    DegenerateInputError,
    EmptyInputError,
    ExtentError,
    FormatError,
    GtscopeError,
    MissingDataError,
    ParameterError,
    PipelineStageError,
)
from .ingestion import (
    load_generic_gt,
    load_smd_dataset,
    summarize,
    top_variation_kpis,
    write_matrix_csv,
    write_temporal_csv,
)
from .model import (
    AnomalousEvent,
    DataSource,
    EventTimeline,
    GroundTruthMatrix,
    SummaryStats,
)
from .nullmodel import (
    NullModelConfig,
    expected_shared,
    monte_carlo_shared,
    shared_kpi_pmf,
)
from .popularity import (
    GainCurve,
    PopularityProfile,
    ZipfEnvelopeConfig,
    gain_curve,
    popularity_profile,
    zipf_envelope,
)
from .proximus import (
    Cluster,
    Clustering,
    ClusteringParams,
    ProximusClustering,
    cluster_footprints,
    cluster_summary,
    rank_one_approximate,
)
from .selection import GridResult, ProximusGridSearch, grid_search
from .spatial import (
    FootprintMatrix,
    build_footprint_matrix,
    duration_footprint_correlation,
    footprint_stats,
)
from .temporal import (
    duration_histogram,
    extract_events,
    interarrival_duration_scatter,
    interarrivals,
    is_spike,
)

__all__ = [
    "__version__",
    "AnomalousEvent",
    "Cluster",
    "Clustering",
    "ClusteringParams",
    "DataSource",
    "DegenerateInputError",
    "EmptyInputError",
    "EventTimeline",
    "ExtentError",
    "FootprintMatrix",
    "FormatError",
    "GainCurve",
    "GridResult",
    "GroundTruthMatrix",
    "GtscopeError",
    "MissingDataError",
    "NullModelConfig",
    "ParameterError",
    "PipelineStageError",
    "PopularityProfile",
    "ProximusClustering",
    "ProximusGridSearch",
    "SummaryStats",
    "ZipfEnvelopeConfig",
    "build_footprint_matrix",
    "cluster_footprints",
    "cluster_summary",
    "duration_footprint_correlation",
    "duration_histogram",
    "expected_shared",
    "extract_events",
    "footprint_stats",
    "gain_curve",
    "grid_search",
    "interarrival_duration_scatter",
    "interarrivals",
    "is_spike",
    "load_generic_gt",
    "load_smd_dataset",
    "monte_carlo_shared",
    "popularity_profile",
    "rank_one_approximate",
    "shared_kpi_pmf",
    "summarize",
    "top_variation_kpis",
    "write_matrix_csv",
    "write_temporal_csv",
    "zipf_envelope",
]
