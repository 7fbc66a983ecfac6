"""End-to-end analysis pipeline: bundle in, report plus figure CSVs out.

Stages run sequentially (ingest, temporal, spatial, selection, null model,
popularity, gain). Outputs are staged and only promoted into the output
directory when every stage succeeds; on failure the partial outputs move to
a ``quarantine/`` subdirectory and the failing stage is reported.
"""

from __future__ import annotations

import shutil
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ._version import __version__
from .bundle import AnalysisBundle, load_source, sha256_file, validate_bundle
from .config import PipelineConfig
from .exceptions import DegenerateInputError, PipelineStageError
from .ingestion import summarize
from .model import DataSource
from .nullmodel import NullModelConfig, expected_shared, shared_kpi_pmf
from .popularity import (
    ALL_CLUSTERS_CAPPED,
    TOP10_CAPPED,
    ZipfEnvelopeConfig,
    gain_curve,
    popularity_profile,
    zipf_envelope,
)
from .proximus import cluster_summary
from .selection import grid_search
from .serialize import write_csv, write_json
from .spatial import (
    build_footprint_matrix,
    duration_footprint_correlation,
    feature_counts_by_dataset,
    footprint_stats,
)
from .temporal import (
    duration_histogram,
    interarrival_duration_scatter,
    source_timelines,
)

REPORT_SCHEMA_VERSION = 1
SKIPPED_TEMPORAL_ONLY = {"skipped": "temporal-only"}


def _stats_dict(values) -> dict:
    stats = summarize(values)
    return {"median": stats.median, "mad": stats.mad}


def _ingestion_section(bundle: AnalysisBundle, source: DataSource, n_events: int) -> dict:
    raw_lines = [d.raw_event_lines for d in bundle.datasets]
    section = {
        "source_name": source.name,
        "gt_extent": source.gt_extent,
        "gt_type": source.gt_type,
        "n_datasets": len(source.datasets),
        "samples_per_dataset": _stats_dict([ds.n_samples for ds in source.datasets]),
        "n_events_merged": n_events,
        "n_events_raw_lines": (
            int(sum(raw_lines)) if all(v is not None for v in raw_lines) else None
        ),
    }
    if source.gt_extent == "spatio-temporal":
        section["features_per_dataset"] = _stats_dict(
            [ds.n_features for ds in source.datasets]
        )
    return section


def run_pipeline(
    bundle: AnalysisBundle,
    config: PipelineConfig,
    out_dir: str | Path,
    *,
    bundle_path: str | Path | None = None,
) -> Path:
    """Run every stage and write ``report.json`` plus figure CSVs to ``out_dir``.

    Returns the output directory. Raises :class:`PipelineStageError` naming
    the first failing stage; partial outputs then live in
    ``out_dir/quarantine``.
    """
    out_dir = Path(out_dir)
    staging = out_dir / ".staging"
    if staging.exists():
        shutil.rmtree(staging)
    staging.mkdir(parents=True, exist_ok=True)

    report: dict = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "provenance": {
            "tool": "gtscope",
            "version": __version__,
            "seed": config.seed,
            "config": config.to_dict(),
            "bundle_sha256": sha256_file(bundle_path) if bundle_path else None,
        },
    }

    stage = "validate"
    try:
        violations = validate_bundle(bundle)
        if violations:
            details = "; ".join(f"{v.kind}({v.where}): {v.message}" for v in violations[:5])
            raise PipelineStageError(stage, f"{len(violations)} violation(s): {details}")

        stage = "ingest"
        source = load_source(bundle)
        timelines = source_timelines(source)
        n_events = sum(len(tl) for tl in timelines)
        report["ingestion"] = _ingestion_section(bundle, source, n_events)

        stage = "temporal"
        report["temporal"] = _temporal_stage(source, config, staging)

        spatial_ok = source.gt_extent == "spatio-temporal"
        if not spatial_ok:
            for key in ("spatial", "clustering", "nullmodel", "popularity", "gain"):
                report[key] = dict(SKIPPED_TEMPORAL_ONLY)
        else:
            stage = "spatial"
            fm, spatial_section = _spatial_stage(source, staging)
            report["spatial"] = spatial_section

            stage = "selection"
            clustering_section, winner = _selection_stage(fm, config, staging)
            report["clustering"] = clustering_section

            stage = "nullmodel"
            report["nullmodel"] = _nullmodel_stage(source, fm)

            stage = "popularity"
            report["popularity"] = _popularity_stage(winner, fm.n_events, config, staging)

            stage = "gain"
            report["gain"] = _gain_stage(winner, config, staging)

        stage = "report"
        write_json(staging / "report.json", report)
    except PipelineStageError:
        _quarantine(staging, out_dir)
        raise
    except Exception as exc:
        _quarantine(staging, out_dir)
        raise PipelineStageError(stage, str(exc)) from exc

    for item in staging.iterdir():
        target = out_dir / item.name
        if target.exists():
            target.unlink()
        item.rename(target)
    staging.rmdir()
    return out_dir


def _quarantine(staging: Path, out_dir: Path) -> None:
    quarantine = out_dir / "quarantine"
    if quarantine.exists():
        shutil.rmtree(quarantine)
    staging.rename(quarantine)


def _temporal_stage(source: DataSource, config: PipelineConfig, staging: Path) -> dict:
    hist = duration_histogram([source], config.duration_bins_s)
    scatter = interarrival_duration_scatter([source])
    durations = hist.durations[source.name]
    section = {
        "n_events": int(durations.size),
        "duration_bin_edges_s": list(hist.bin_edges),
        "duration_counts": hist.counts[source.name].tolist(),
        "median_duration_s": float(np.median(durations)) if durations.size else None,
        "fraction_shorter_than_s": {
            str(int(config.short_duration_threshold_s)): hist.fraction_below(
                source.name, config.short_duration_threshold_s
            )
        },
        "median_interarrival_s": scatter.median_interarrival_seconds[source.name],
    }
    write_csv(
        staging / "fig2a_duration_histogram.csv",
        ["source", "bin_lo_s", "bin_hi_s", "count"],
        [
            (source.name, lo, hi, int(c))
            for lo, hi, c in zip(
                hist.bin_edges[:-1], hist.bin_edges[1:], hist.counts[source.name]
            )
        ],
    )
    write_csv(
        staging / "fig3_interarrival_vs_duration.csv",
        ["source", "dataset_id", "interarrival_s", "duration_s"],
        [
            (r.source, r.dataset_id, r.interarrival_seconds, r.duration_seconds)
            for r in scatter.rows
        ],
    )
    return section


def _spatial_stage(source: DataSource, staging: Path):
    fm = build_footprint_matrix(source)
    stats = footprint_stats(fm, feature_counts_by_dataset(source))
    counts = np.asarray(stats.kpi_counts, dtype=np.float64)
    section = {
        "n_events": fm.n_events,
        "n_excluded_empty_footprint": fm.n_excluded,
        "n_union_features": fm.n_union_features,
        "kpis_per_event": _stats_dict(counts) if counts.size else None,
        "univariate_fraction": stats.univariate_fraction,
    }
    try:
        section["duration_footprint_pearson_r"] = duration_footprint_correlation(source)
    except DegenerateInputError as exc:
        section["duration_footprint_pearson_r"] = None
        section["duration_footprint_pearson_note"] = str(exc)

    write_csv(
        staging / "fig4a_footprint_percentages.csv",
        ["dataset_id", "start", "end", "kpi_count", "kpi_percentage"],
        [
            (ev.dataset_id, ev.start, ev.end, count, pct)
            for ev, count, pct in zip(fm.events, stats.kpi_counts, stats.kpi_percentages)
        ],
    )
    write_csv(
        staging / "footprint_matrix.csv",
        ["dataset_id", "start", "end", *fm.feature_names],
        [
            (ev.dataset_id, ev.start, ev.end, *row.tolist())
            for ev, row in zip(fm.events, fm.matrix)
        ],
    )
    return fm, section


def _selection_stage(fm, config: PipelineConfig, staging: Path):
    best, results = grid_search(
        fm,
        radius_stride=config.radius_stride,
        size_stride=config.size_stride,
        n_jobs=config.threads,
    )
    winner = best.clustering
    summaries = [cluster_summary(c, fm.events) for c in winner.clusters]
    section = {
        "grid_cells": len(results),
        "best_params": {
            "max_radius": best.params.max_radius,
            "min_size": best.params.min_size,
        },
        "rag_bag_size": best.rag_bag_size,
        "total_error": best.total_error,
        "n_clusters": best.n_clusters,
        "cluster_summaries": [asdict(s) for s in summaries],
    }
    write_csv(
        staging / "grid.csv",
        ["max_radius", "min_size", "rag_bag_size", "total_error", "n_clusters"],
        [
            (
                r.params.max_radius,
                r.params.min_size,
                r.rag_bag_size,
                r.total_error,
                r.n_clusters,
            )
            for r in results
        ],
    )
    write_csv(
        staging / "fig5_cluster_summaries.csv",
        [
            "rank",
            "size",
            "size_fraction",
            "pattern_length",
            "mean_dispersion",
            "median_kpi_count",
            "univariate_fraction",
            "median_duration_s",
            "spike_fraction",
        ],
        [
            (
                s.rank,
                s.size,
                s.size_fraction,
                s.pattern_length,
                s.mean_dispersion,
                s.median_kpi_count,
                s.univariate_fraction,
                s.median_duration_seconds,
                s.spike_fraction,
            )
            for s in summaries[:5]
        ],
    )
    return section, winner


def _nullmodel_stage(source: DataSource, fm) -> dict:
    kpis_per_event = int(round(float(np.median(fm.kpi_counts()))))
    features_per_dataset = int(
        round(float(np.median([ds.n_features for ds in source.datasets])))
    )
    cfg = NullModelConfig(min(kpis_per_event, features_per_dataset), features_per_dataset)
    pmf = shared_kpi_pmf(cfg)
    return {
        "kpis_per_event": cfg.kpis_per_event,
        "total_kpis": cfg.total_kpis,
        "expected_shared": expected_shared(cfg),
        "pmf": pmf.tolist(),
        "pmf_mean": float(np.arange(pmf.size) @ pmf),
    }


def _popularity_stage(winner, n_events: int, config: PipelineConfig, staging: Path) -> dict:
    profile = popularity_profile(winner, n_events)
    envelope = zipf_envelope(
        ZipfEnvelopeConfig(
            catalog_size=config.zipf_catalog_size,
            alpha=config.zipf_alpha,
            n_events=n_events,
            n_replicates=config.zipf_replicates,
            confidence_levels=config.confidence_levels,
            seed=config.seed,
        )
    )
    section = {
        "ranked_shares": [[rank, share] for rank, share in profile.ranked_shares],
        "top5_coverage": profile.top5_coverage,
        "top10_coverage": profile.top10_coverage,
        "zipf": {
            "catalog_size": config.zipf_catalog_size,
            "alpha": config.zipf_alpha,
            "reference_shares": envelope.reference_shares.tolist(),
        },
    }
    header = ["rank", "observed_share", "zipf_reference"]
    for level in config.confidence_levels:
        header += [f"band{level:g}_lo", f"band{level:g}_hi"]
    rows = []
    shares = dict(profile.ranked_shares)
    for i in range(config.zipf_catalog_size):
        rank = i + 1
        row = [rank, shares.get(rank, ""), envelope.reference_shares[i]]
        for level in config.confidence_levels:
            lo, hi = envelope.bands[level]
            row += [lo[i], hi[i]]
        rows.append(row)
    write_csv(staging / "fig6_popularity.csv", header, rows)
    return section


def _gain_stage(winner, config: PipelineConfig, staging: Path) -> dict:
    curves = {
        strategy: gain_curve(winner, strategy, config.gain_caps)
        for strategy in (TOP10_CAPPED, ALL_CLUSTERS_CAPPED)
    }
    section = {
        strategy: [
            {"cap": p.cap, "labels_used": p.labels_used, "reduction_factor": p.reduction_factor}
            for p in curve.points
        ]
        for strategy, curve in curves.items()
    }
    write_csv(
        staging / "fig7_gain.csv",
        ["strategy", "cap", "labels_used", "reduction_factor"],
        [
            (strategy, p.cap, p.labels_used, p.reduction_factor)
            for strategy, curve in curves.items()
            for p in curve.points
        ],
    )
    return section
