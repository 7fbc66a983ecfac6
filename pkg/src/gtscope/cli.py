"""Command-line interface.

Verbs: ingest, validate, temporal, spatial, cluster, select, nullmodel,
zipf, gain, pipeline. Global flags (--seed, --threads, --format) are
accepted both before and after the verb; the GTSCOPE_DATA_DIR environment
variable supplies the default root for relative bundle paths.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from ._version import __version__
from .bundle import load_bundle, load_source, validate_bundle, write_bundle
from .config import DEFAULT_CONFIG, load_config
from .exceptions import FormatError, GtscopeError, ParameterError, PipelineStageError
from .ingestion import (
    MATRIX_CSV,
    TEMPORAL_CSV,
    load_generic_gt,
    load_smd_dataset,
    read_interpretation_lines,
    top_variation_kpis,
)
from .model import AnomalousEvent, DataSource, GroundTruthMatrix
from .nullmodel import NullModelConfig, expected_shared, monte_carlo_shared, shared_kpi_pmf
from .pipeline import run_pipeline
from .popularity import (
    ALL_CLUSTERS_CAPPED,
    TOP10_CAPPED,
    ZipfEnvelopeConfig,
    gain_curve,
    zipf_envelope,
)
from .proximus import (
    Cluster,
    Clustering,
    ClusteringParams,
    cluster_footprints,
    cluster_summary,
)
from .selection import grid_search
from .serialize import dumps_canonical, write_csv, write_json
from .spatial import (
    FootprintMatrix,
    build_footprint_matrix,
    duration_footprint_correlation,
    feature_counts_by_dataset,
    footprint_stats,
)
from .temporal import (
    duration_histogram,
    interarrival_duration_scatter,
    interarrivals,
    source_timelines,
)
from .validation import as_binary_array

CLUSTERS_SCHEMA_VERSION = 1


def _global_flags(parser: argparse.ArgumentParser, include_format: bool = True) -> None:
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="RNG seed")
    parser.add_argument(
        "--threads", type=int, default=argparse.SUPPRESS, help="parallel workers for grid search"
    )
    if include_format:
        parser.add_argument(
            "--format",
            choices=("json", "csv"),
            default=argparse.SUPPRESS,
            help="stdout format for printing verbs",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gtscope",
        description="Ground-truth characterization for labeled multivariate time series",
    )
    parser.add_argument("--version", action="version", version=f"gtscope {__version__}")
    _global_flags(parser)
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("ingest", help="load raw label files into a canonical bundle")
    p.add_argument("--format", dest="ingest_format", required=True, choices=("matrix", "temporal", "smd"))
    p.add_argument("--values", help="values file or directory (required for smd)")
    p.add_argument("--labels", required=True, help="label file or directory")
    p.add_argument("--out", required=True, help="bundle JSON path")
    p.add_argument("--source-name", help="data source name (default: bundle stem)")
    p.add_argument("--gt-type", choices=("controlled", "manual"), default="manual")
    p.add_argument("--sampling-period", type=float, default=60.0, help="seconds per sample")
    p.add_argument("--strip-name-regex", help="regex prefix removed from feature names")
    _global_flags(p, include_format=False)
    p.set_defaults(handler=_cmd_ingest)

    p = sub.add_parser("validate", help="check a bundle's digests, shapes and names")
    p.add_argument("--bundle", required=True)
    _global_flags(p)
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("temporal", help="durations, interarrivals and histograms")
    p.add_argument("--bundle", required=True)
    p.add_argument("--report", required=True, help="output JSON path")
    p.add_argument("--csv", help="directory for per-figure CSVs")
    p.add_argument("--bins", help="comma-separated duration bin edges in seconds")
    p.add_argument("--top-kpis", type=int, default=0, help="per-event top-K varying KPI export")
    _global_flags(p)
    p.set_defaults(handler=_cmd_temporal)

    p = sub.add_parser("spatial", help="footprint matrix and per-event footprint stats")
    p.add_argument("--bundle", required=True)
    p.add_argument("--report", required=True, help="output JSON path")
    p.add_argument("--matrix", required=True, help="output footprint-matrix CSV path")
    _global_flags(p)
    p.set_defaults(handler=_cmd_spatial)

    p = sub.add_parser("cluster", help="cluster a footprint matrix at fixed parameters")
    p.add_argument("--matrix", required=True, help="footprint-matrix CSV (spatial output)")
    p.add_argument("--radius", type=int, required=True, help="max Hamming radius")
    p.add_argument("--minsize", type=int, required=True, help="min cluster size")
    p.add_argument("--sampling-period", type=float, default=60.0)
    p.add_argument("--out", required=True, help="clusters JSON path")
    _global_flags(p)
    p.set_defaults(handler=_cmd_cluster)

    p = sub.add_parser("select", help="grid search over clustering parameters")
    p.add_argument("--matrix", required=True, help="footprint-matrix CSV (spatial output)")
    p.add_argument("--radius-max", type=int, help="cap the radius range (default: n features)")
    p.add_argument("--minsize-max", type=int, help="cap the size range (default: n events)")
    p.add_argument("--stride-r", type=int, default=1)
    p.add_argument("--stride-s", type=int, default=1)
    p.add_argument("--sampling-period", type=float, default=60.0)
    p.add_argument("--out", required=True, help="winner clusters JSON path")
    p.add_argument("--grid-csv", help="audit grid CSV (default: <out>.grid.csv)")
    _global_flags(p)
    p.set_defaults(handler=_cmd_select)

    p = sub.add_parser("nullmodel", help="shared-KPI distribution under random labeling")
    p.add_argument("--kpis-per-event", type=int, required=True)
    p.add_argument("--total-kpis", type=int, required=True)
    p.add_argument("--mc-trials", type=int, default=0, help="optional Monte-Carlo verification")
    _global_flags(p)
    p.set_defaults(handler=_cmd_nullmodel)

    p = sub.add_parser("zipf", help="Zipf reference shares with simulation envelope")
    p.add_argument("--catalog", type=int, default=DEFAULT_CONFIG.zipf_catalog_size)
    p.add_argument("--alpha", type=float, default=DEFAULT_CONFIG.zipf_alpha)
    p.add_argument("--events", type=int, required=True)
    p.add_argument("--levels", default="0.95,0.99", help="comma-separated confidence levels")
    p.add_argument("--replicates", type=int, default=DEFAULT_CONFIG.zipf_replicates)
    p.add_argument("--out", required=True, help="output CSV path")
    _global_flags(p)
    p.set_defaults(handler=_cmd_zipf)

    p = sub.add_parser("gain", help="active-labeling gain curve from a clusters JSON")
    p.add_argument("--clusters", required=True, help="clusters JSON (cluster/select output)")
    p.add_argument("--strategy", choices=("top10", "all"), required=True)
    p.add_argument("--max-cap", type=int, default=20)
    p.add_argument("--label-rag-bag", action="store_true", help="pessimistic bound: label rag-bag events too")
    p.add_argument("--out", required=True, help="output CSV path")
    _global_flags(p)
    p.set_defaults(handler=_cmd_gain)

    p = sub.add_parser("pipeline", help="run every stage and write report plus figure CSVs")
    p.add_argument("--bundle", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="JSON config overriding the built-in defaults")
    _global_flags(p)
    p.set_defaults(handler=_cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "handler", None) is None:
        parser.print_help()
        return 0
    try:
        return args.handler(args)
    except PipelineStageError as exc:
        print(f"gtscope: {exc}", file=sys.stderr)
        return 2
    except (GtscopeError, ValueError, KeyError, IndexError, OSError) as exc:
        print(f"gtscope: error: {exc}", file=sys.stderr)
        return 1


def _resolve(path: str) -> Path:
    """Resolve a path against GTSCOPE_DATA_DIR when it is relative and absent."""
    p = Path(path)
    if p.exists() or p.is_absolute():
        return p
    root = os.environ.get("GTSCOPE_DATA_DIR")
    if root and (Path(root) / p).exists():
        return Path(root) / p
    return p


def _out_format(args) -> str:
    return getattr(args, "format", "csv")


def _seed(args) -> int:
    return getattr(args, "seed", DEFAULT_CONFIG.seed)


# --- ingest -----------------------------------------------------------------


def _pair_inputs(labels: Path, values: Path | None) -> list[tuple[str, Path, Path | None]]:
    """(dataset_id, labels_file, values_file) triples; directories pair by stem."""
    if labels.is_dir():
        label_files = sorted(f for f in labels.iterdir() if f.is_file())
        if not label_files:
            raise ParameterError(f"{labels}: no label files found")
        pairs = []
        for lf in label_files:
            vf = None
            if values is not None:
                if not values.is_dir():
                    raise ParameterError("--values must be a directory when --labels is one")
                for candidate in sorted(values.iterdir()):
                    if candidate.stem == lf.stem:
                        vf = candidate
                        break
                if vf is None:
                    raise ParameterError(f"no values file matching {lf.stem!r} in {values}")
            pairs.append((lf.stem, lf, vf))
        return pairs
    return [(labels.stem, labels, values)]


def _cmd_ingest(args) -> int:
    labels = _resolve(args.labels)
    values = _resolve(args.values) if args.values else None
    if args.ingest_format == "smd" and values is None:
        raise ParameterError("--values is required for the smd format")
    out = Path(args.out)
    source_name = args.source_name or out.stem

    datasets: list[GroundTruthMatrix] = []
    raw_lines: dict[str, int] = {}
    for dataset_id, label_file, value_file in _pair_inputs(labels, values):
        if args.ingest_format == "smd":
            assert value_file is not None
            sample = np.loadtxt(value_file, delimiter=",", dtype=np.float64, ndmin=2)
            gt = load_smd_dataset(
                value_file,
                label_file,
                n_features=sample.shape[1],
                n_samples=sample.shape[0],
                dataset_id=dataset_id,
                sampling_period=args.sampling_period,
            )
            raw_lines[dataset_id] = len(read_interpretation_lines(label_file))
        else:
            schema = MATRIX_CSV if args.ingest_format == "matrix" else TEMPORAL_CSV
            gt = load_generic_gt(
                label_file,
                schema,
                dataset_id=dataset_id,
                sampling_period=args.sampling_period,
                strip_name_regex=args.strip_name_regex,
            )
            if value_file is not None:
                kpi = np.loadtxt(value_file, delimiter=",", dtype=np.float64, ndmin=2)
                if gt.n_features is None and kpi.shape[1] == 1:
                    kpi = kpi[:, 0]
                gt = replace(gt, kpi_values=kpi)
        datasets.append(gt)

    extent = "temporal" if args.ingest_format == "temporal" else "spatio-temporal"
    source = DataSource(source_name, tuple(datasets), extent, args.gt_type)
    write_bundle(
        source,
        out,
        raw_event_lines=raw_lines or None,
        command=f"ingest --format {args.ingest_format}",
        seed=_seed(args),
    )
    print(f"wrote bundle {out} ({len(datasets)} dataset(s))")
    return 0


# --- validate ----------------------------------------------------------------


def _cmd_validate(args) -> int:
    bundle = load_bundle(_resolve(args.bundle))
    violations = validate_bundle(bundle)
    payload = {
        "bundle": str(_resolve(args.bundle)),
        "n_violations": len(violations),
        "violations": [
            {"kind": v.kind, "where": v.where, "message": v.message} for v in violations
        ],
    }
    sys.stdout.write(dumps_canonical(payload))
    return 0


# --- temporal ----------------------------------------------------------------


def _cmd_temporal(args) -> int:
    bundle = load_bundle(_resolve(args.bundle))
    source = load_source(bundle)
    bins = DEFAULT_CONFIG.duration_bins_s
    if args.bins:
        bins = tuple(float(tok) for tok in args.bins.split(","))
    hist = duration_histogram([source], bins)
    scatter = interarrival_duration_scatter([source])
    timelines = source_timelines(source)

    events_payload = []
    for tl, gt in zip(timelines, source.datasets):
        gaps = interarrivals(tl)
        for i, ev in enumerate(tl.events):
            entry = {
                "dataset_id": ev.dataset_id,
                "start": ev.start,
                "end": ev.end,
                "duration_s": ev.duration_seconds,
                "interarrival_s": float(gaps[i - 1]) * gt.sampling_period if i else None,
            }
            if args.top_kpis and gt.kpi_values is not None:
                entry["top_kpis"] = top_variation_kpis(
                    gt,
                    (ev.start, ev.end + 1),
                    args.top_kpis,
                    restrict_to_gt=gt.is_spatiotemporal,
                )
            events_payload.append(entry)

    report = {
        "source_name": source.name,
        "n_events": len(events_payload),
        "events": events_payload,
        "duration_bin_edges_s": list(hist.bin_edges),
        "duration_counts": hist.counts[source.name].tolist(),
        "median_interarrival_s": scatter.median_interarrival_seconds[source.name],
    }
    write_json(args.report, report)
    if args.csv:
        csv_dir = Path(args.csv)
        csv_dir.mkdir(parents=True, exist_ok=True)
        write_csv(
            csv_dir / "durations.csv",
            ["dataset_id", "start", "end", "duration_s"],
            [(e["dataset_id"], e["start"], e["end"], e["duration_s"]) for e in events_payload],
        )
        write_csv(
            csv_dir / "fig2a_duration_histogram.csv",
            ["source", "bin_lo_s", "bin_hi_s", "count"],
            [
                (source.name, lo, hi, int(c))
                for lo, hi, c in zip(
                    hist.bin_edges[:-1], hist.bin_edges[1:], hist.counts[source.name]
                )
            ],
        )
        write_csv(
            csv_dir / "fig3_interarrival_vs_duration.csv",
            ["source", "dataset_id", "interarrival_s", "duration_s"],
            [
                (r.source, r.dataset_id, r.interarrival_seconds, r.duration_seconds)
                for r in scatter.rows
            ],
        )
    print(f"wrote {args.report} ({len(events_payload)} events)")
    return 0


# --- spatial -----------------------------------------------------------------


def _cmd_spatial(args) -> int:
    bundle = load_bundle(_resolve(args.bundle))
    source = load_source(bundle)
    fm = build_footprint_matrix(source)
    stats = footprint_stats(fm, feature_counts_by_dataset(source))
    try:
        pearson = duration_footprint_correlation(source)
    except GtscopeError:
        pearson = None
    report = {
        "source_name": source.name,
        "n_events": fm.n_events,
        "n_excluded_empty_footprint": fm.n_excluded,
        "n_union_features": fm.n_union_features,
        "univariate_fraction": stats.univariate_fraction,
        "kpi_counts": list(stats.kpi_counts),
        "kpi_percentages": list(stats.kpi_percentages),
        "duration_footprint_pearson_r": pearson,
    }
    write_json(args.report, report)
    write_csv(
        args.matrix,
        ["dataset_id", "start", "end", *fm.feature_names],
        [
            (ev.dataset_id, ev.start, ev.end, *row.tolist())
            for ev, row in zip(fm.events, fm.matrix)
        ],
    )
    print(f"wrote {args.matrix} ({fm.n_events} events x {fm.n_union_features} features)")
    return 0


# --- cluster / select --------------------------------------------------------


def read_footprint_csv(path: str | Path, sampling_period: float = 60.0) -> FootprintMatrix:
    """Rebuild a FootprintMatrix from the spatial verb's CSV output."""
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:3] != ["dataset_id", "start", "end"]:
            raise FormatError(f"{path}: expected header dataset_id,start,end,<features...>")
        feature_names = tuple(header[3:])
        events = []
        rows = []
        for cells in reader:
            if len(cells) != 3 + len(feature_names):
                raise FormatError(f"{path}: row width {len(cells)} != {3 + len(feature_names)}")
            bits = as_binary_array([int(c) for c in cells[3:]], name="footprint row")
            events.append(
                AnomalousEvent(
                    cells[0],
                    int(cells[1]),
                    int(cells[2]),
                    sampling_period,
                    frozenset(np.flatnonzero(bits).tolist()),
                )
            )
            rows.append(bits)
    matrix = np.vstack(rows) if rows else np.zeros((0, len(feature_names)), dtype=np.uint8)
    return FootprintMatrix(matrix, feature_names, tuple(events))


def clusters_to_payload(fm: FootprintMatrix, clustering: Clustering) -> dict:
    """Clusters JSON: patterns as feature names, members as event keys."""
    names = fm.feature_names

    def event_key(i: int) -> dict:
        ev = fm.events[i]
        return {"row": i, "dataset_id": ev.dataset_id, "start": ev.start, "end": ev.end}

    return {
        "schema_version": CLUSTERS_SCHEMA_VERSION,
        "params": {
            "max_radius": clustering.params.max_radius,
            "min_size": clustering.params.min_size,
        },
        "feature_names": list(names),
        "n_events": clustering.n_rows,
        "total_error": clustering.total_error,
        "clusters": [
            {
                "rank": c.rank,
                "pattern": [names[j] for j in np.flatnonzero(c.dominant_pattern)],
                "members": [event_key(i) for i in c.member_rows],
                "summary": asdict(cluster_summary(c, fm.events)),
            }
            for c in clustering.clusters
        ],
        "rag_bag": [event_key(i) for i in clustering.rag_bag],
    }


def clustering_from_payload(payload: dict) -> Clustering:
    """Inverse of :func:`clusters_to_payload` (summaries are not needed back)."""
    names = list(payload["feature_names"])
    index = {n: j for j, n in enumerate(names)}
    clusters = []
    for c in payload["clusters"]:
        pattern = np.zeros(len(names), dtype=np.uint8)
        for n in c["pattern"]:
            pattern[index[n]] = 1
        members = tuple(m["row"] for m in c["members"])
        distances_mean = c.get("summary", {}).get("mean_dispersion", 0.0)
        clusters.append(Cluster(pattern, members, float(distances_mean), int(c["rank"])))
    params = ClusteringParams(
        payload["params"]["max_radius"], payload["params"]["min_size"]
    )
    rag = tuple(m["row"] for m in payload["rag_bag"])
    return Clustering(tuple(clusters), rag, params, float(payload["total_error"]))


def _cmd_cluster(args) -> int:
    fm = read_footprint_csv(_resolve(args.matrix), args.sampling_period)
    clustering = cluster_footprints(fm, ClusteringParams(args.radius, args.minsize))
    write_json(args.out, clusters_to_payload(fm, clustering))
    print(
        f"wrote {args.out}: {len(clustering.clusters)} clusters, "
        f"rag bag {len(clustering.rag_bag)}, error {clustering.total_error:g}"
    )
    return 0


def _cmd_select(args) -> int:
    fm = read_footprint_csv(_resolve(args.matrix), args.sampling_period)
    radius_values = None
    if args.radius_max is not None:
        radius_values = range(0, args.radius_max + 1, args.stride_r)
    size_values = None
    if args.minsize_max is not None:
        size_values = range(1, args.minsize_max + 1, args.stride_s)
    best, results = grid_search(
        fm,
        radius_values,
        size_values,
        radius_stride=args.stride_r,
        size_stride=args.stride_s,
        n_jobs=getattr(args, "threads", None),
    )
    write_json(args.out, clusters_to_payload(fm, best.clustering))
    grid_csv = args.grid_csv or f"{args.out}.grid.csv"
    write_csv(
        grid_csv,
        ["max_radius", "min_size", "rag_bag_size", "total_error", "n_clusters"],
        [
            (r.params.max_radius, r.params.min_size, r.rag_bag_size, r.total_error, r.n_clusters)
            for r in results
        ],
    )
    print(
        f"winner max_radius={best.params.max_radius} min_size={best.params.min_size} "
        f"rag_bag={best.rag_bag_size} error={best.total_error:g} "
        f"clusters={best.n_clusters}; grid at {grid_csv}"
    )
    return 0


# --- nullmodel / zipf / gain ---------------------------------------------------


def _cmd_nullmodel(args) -> int:
    cfg = NullModelConfig(args.kpis_per_event, args.total_kpis)
    pmf = shared_kpi_pmf(cfg)
    expectation = expected_shared(cfg)
    empirical = None
    if args.mc_trials > 0:
        empirical = monte_carlo_shared(cfg, args.mc_trials, _seed(args))
    if _out_format(args) == "json":
        payload = {
            "kpis_per_event": cfg.kpis_per_event,
            "total_kpis": cfg.total_kpis,
            "expected_shared": expectation,
            "pmf": pmf.tolist(),
        }
        if empirical is not None:
            payload["empirical_pmf"] = empirical.tolist()
            payload["mc_trials"] = args.mc_trials
        sys.stdout.write(dumps_canonical(payload))
    else:
        header = "shared,probability" + (",empirical" if empirical is not None else "")
        print(header)
        for l, p in enumerate(pmf):
            row = f"{l},{p:.12g}"
            if empirical is not None:
                row += f",{empirical[l]:.12g}"
            print(row)
        print(f"expected_shared,{expectation:.12g}")
    return 0


def _cmd_zipf(args) -> int:
    levels = tuple(float(tok) for tok in args.levels.split(","))
    cfg = ZipfEnvelopeConfig(
        catalog_size=args.catalog,
        alpha=args.alpha,
        n_events=args.events,
        n_replicates=args.replicates,
        confidence_levels=levels,
        seed=_seed(args),
    )
    envelope = zipf_envelope(cfg)
    header = ["rank", "reference_share"]
    for level in levels:
        header += [f"band{level:g}_lo", f"band{level:g}_hi"]
    rows = []
    for i in range(cfg.catalog_size):
        row = [i + 1, envelope.reference_shares[i]]
        for level in levels:
            lo, hi = envelope.bands[level]
            row += [lo[i], hi[i]]
        rows.append(row)
    write_csv(args.out, header, rows)
    print(f"wrote {args.out}")
    return 0


def _cmd_gain(args) -> int:
    payload = json.loads(Path(_resolve(args.clusters)).read_text(encoding="utf-8"))
    clustering = clustering_from_payload(payload)
    strategy = TOP10_CAPPED if args.strategy == "top10" else ALL_CLUSTERS_CAPPED
    caps = tuple(range(1, args.max_cap + 1))
    curve = gain_curve(clustering, strategy, caps, label_rag_bag=args.label_rag_bag)
    write_csv(
        args.out,
        ["strategy", "cap", "labels_used", "reduction_factor"],
        [(curve.strategy, p.cap, p.labels_used, p.reduction_factor) for p in curve.points],
    )
    print(f"wrote {args.out}")
    return 0


# --- pipeline ------------------------------------------------------------------


def _cmd_pipeline(args) -> int:
    bundle_path = _resolve(args.bundle)
    bundle = load_bundle(bundle_path)
    config = load_config(
        args.config,
        seed=getattr(args, "seed", None),
        threads=getattr(args, "threads", None),
    )
    out_dir = run_pipeline(bundle, config, args.out, bundle_path=bundle_path)
    print(f"pipeline complete: {out_dir / 'report.json'}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
