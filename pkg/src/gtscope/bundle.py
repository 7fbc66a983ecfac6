"""Canonical on-disk bundle: one JSON manifest plus per-dataset CSV files.

A bundle directory holds ``<name>.json`` describing a data source and, next
to it, one label CSV per dataset (matrix_csv or temporal_csv schema) and
optional value CSVs. Every referenced file's SHA-256 digest is recorded so
downstream stages can verify exactly what they consume.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from ._version import __version__
from .exceptions import FormatError, GtscopeError
from .ingestion import (
    MATRIX_CSV,
    TEMPORAL_CSV,
    load_generic_gt,
    write_matrix_csv,
    write_temporal_csv,
)
from .model import SPATIO_TEMPORAL, DataSource, GroundTruthMatrix
from .serialize import write_json

BUNDLE_SCHEMA_VERSION = 1


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass(frozen=True)
class DatasetDescriptor:
    dataset_id: str
    sampling_period_s: float
    n_samples: int
    n_features: int | None
    labels_path: str  # relative to the bundle file's directory
    labels_sha256: str
    labels_schema: str
    values_path: str | None = None
    values_sha256: str | None = None
    raw_event_lines: int | None = None  # label-file lines before interval merging


@dataclass(frozen=True)
class AnalysisBundle:
    root: Path
    source_name: str
    gt_extent: str
    gt_type: str
    datasets: tuple[DatasetDescriptor, ...]
    provenance: dict

    @property
    def is_spatiotemporal(self) -> bool:
        return self.gt_extent == SPATIO_TEMPORAL


def write_bundle(
    source: DataSource,
    out_path: str | Path,
    *,
    raw_event_lines: dict[str, int] | None = None,
    command: str | None = None,
    seed: int | None = None,
) -> AnalysisBundle:
    """Materialize a source as a bundle next to ``out_path`` (the JSON manifest)."""
    out_path = Path(out_path)
    root = out_path.parent
    root.mkdir(parents=True, exist_ok=True)
    raw_event_lines = raw_event_lines or {}

    descriptors = []
    for ds in source.datasets:
        stem = _safe_stem(ds.dataset_id)
        labels_name = f"{stem}.labels.csv"
        if ds.is_spatiotemporal:
            write_matrix_csv(ds, root / labels_name)
            schema = MATRIX_CSV
        else:
            write_temporal_csv(ds, root / labels_name)
            schema = TEMPORAL_CSV
        values_name = None
        values_sha = None
        if ds.kpi_values is not None:
            values_name = f"{stem}.values.csv"
            np.savetxt(root / values_name, ds.kpi_values, delimiter=",", fmt="%.12g")
            values_sha = sha256_file(root / values_name)
        descriptors.append(
            DatasetDescriptor(
                dataset_id=ds.dataset_id,
                sampling_period_s=ds.sampling_period,
                n_samples=ds.n_samples,
                n_features=ds.n_features,
                labels_path=labels_name,
                labels_sha256=sha256_file(root / labels_name),
                labels_schema=schema,
                values_path=values_name,
                values_sha256=values_sha,
                raw_event_lines=raw_event_lines.get(ds.dataset_id),
            )
        )

    provenance = {
        "tool": "gtscope",
        "version": __version__,
        "command": command,
        "seed": seed,
    }
    bundle = AnalysisBundle(
        root=root,
        source_name=source.name,
        gt_extent=source.gt_extent,
        gt_type=source.gt_type,
        datasets=tuple(descriptors),
        provenance=provenance,
    )
    write_json(out_path, _bundle_to_dict(bundle))
    return bundle


def _safe_stem(dataset_id: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in dataset_id)


def _bundle_to_dict(bundle: AnalysisBundle) -> dict:
    return {
        "schema_version": BUNDLE_SCHEMA_VERSION,
        "source": {
            "name": bundle.source_name,
            "gt_extent": bundle.gt_extent,
            "gt_type": bundle.gt_type,
        },
        "datasets": [
            {
                "dataset_id": d.dataset_id,
                "sampling_period_s": d.sampling_period_s,
                "n_samples": d.n_samples,
                "n_features": d.n_features,
                "labels_path": d.labels_path,
                "labels_sha256": d.labels_sha256,
                "labels_schema": d.labels_schema,
                "values_path": d.values_path,
                "values_sha256": d.values_sha256,
                "raw_event_lines": d.raw_event_lines,
            }
            for d in bundle.datasets
        ],
        "provenance": bundle.provenance,
    }


def load_bundle(path: str | Path) -> AnalysisBundle:
    """Read a bundle manifest (metadata only; datasets load lazily)."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON: {exc}") from exc
    version = raw.get("schema_version")
    if version != BUNDLE_SCHEMA_VERSION:
        raise FormatError(f"{path}: unsupported schema_version {version!r}")
    try:
        source = raw["source"]
        datasets = tuple(
            DatasetDescriptor(
                dataset_id=d["dataset_id"],
                sampling_period_s=float(d["sampling_period_s"]),
                n_samples=int(d["n_samples"]),
                n_features=None if d.get("n_features") is None else int(d["n_features"]),
                labels_path=d["labels_path"],
                labels_sha256=d["labels_sha256"],
                labels_schema=d["labels_schema"],
                values_path=d.get("values_path"),
                values_sha256=d.get("values_sha256"),
                raw_event_lines=d.get("raw_event_lines"),
            )
            for d in raw["datasets"]
        )
        return AnalysisBundle(
            root=path.parent,
            source_name=source["name"],
            gt_extent=source["gt_extent"],
            gt_type=source["gt_type"],
            datasets=datasets,
            provenance=raw.get("provenance", {}),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed bundle: {exc}") from exc


def load_dataset(bundle: AnalysisBundle, descriptor: DatasetDescriptor) -> GroundTruthMatrix:
    gt = load_generic_gt(
        bundle.root / descriptor.labels_path,
        descriptor.labels_schema,
        dataset_id=descriptor.dataset_id,
        sampling_period=descriptor.sampling_period_s,
    )
    if descriptor.values_path is not None:
        values = np.loadtxt(
            bundle.root / descriptor.values_path, delimiter=",", dtype=np.float64, ndmin=2
        )
        if gt.n_features is None and values.shape[1] == 1:
            values = values[:, 0]
        gt = replace(gt, kpi_values=values)
    return gt


def load_source(bundle: AnalysisBundle) -> DataSource:
    """Load every dataset of the bundle into an in-memory DataSource."""
    datasets = tuple(load_dataset(bundle, d) for d in bundle.datasets)
    return DataSource(bundle.source_name, datasets, bundle.gt_extent, bundle.gt_type)


@dataclass(frozen=True)
class Violation:
    kind: str
    where: str
    message: str


def validate_bundle(bundle: AnalysisBundle) -> list[Violation]:
    """Check digests, shapes, binary-ness and name uniqueness; violations are data."""
    violations: list[Violation] = []
    for d in bundle.datasets:
        labels_file = bundle.root / d.labels_path
        if not labels_file.is_file():
            violations.append(Violation("missing_file", d.dataset_id, f"{d.labels_path} not found"))
            continue
        digest = sha256_file(labels_file)
        if digest != d.labels_sha256:
            violations.append(
                Violation(
                    "digest_mismatch",
                    d.dataset_id,
                    f"{d.labels_path}: recorded {d.labels_sha256[:12]}.., actual {digest[:12]}..",
                )
            )
        try:
            gt = load_generic_gt(
                labels_file,
                d.labels_schema,
                dataset_id=d.dataset_id,
                sampling_period=d.sampling_period_s,
            )
        except (FormatError, ValueError, GtscopeError) as exc:
            violations.append(Violation("unloadable", d.dataset_id, str(exc)))
            continue
        if gt.n_samples != d.n_samples:
            violations.append(
                Violation(
                    "shape_mismatch",
                    d.dataset_id,
                    f"{gt.n_samples} samples on disk, {d.n_samples} recorded",
                )
            )
        if gt.n_features != d.n_features:
            violations.append(
                Violation(
                    "shape_mismatch",
                    d.dataset_id,
                    f"{gt.n_features} features on disk, {d.n_features} recorded",
                )
            )
        expect_matrix = bundle.is_spatiotemporal
        if gt.is_spatiotemporal != expect_matrix:
            violations.append(
                Violation("extent_mismatch", d.dataset_id, f"extent differs from {bundle.gt_extent}")
            )
        if d.values_path is not None:
            values_file = bundle.root / d.values_path
            if not values_file.is_file():
                violations.append(
                    Violation("missing_file", d.dataset_id, f"{d.values_path} not found")
                )
            elif d.values_sha256 and sha256_file(values_file) != d.values_sha256:
                violations.append(
                    Violation("digest_mismatch", d.dataset_id, f"{d.values_path}: digest differs")
                )
    ids = [d.dataset_id for d in bundle.datasets]
    if len(set(ids)) != len(ids):
        violations.append(Violation("duplicate_ids", bundle.source_name, "duplicate dataset ids"))
    return violations
